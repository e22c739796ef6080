#include "polyq/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polyq/errors.hpp"
#include "polyq/exact.hpp"
#include "polyq/io.hpp"
#include "polyq/mcmc.hpp"
#include "polyq/pulling.hpp"
#include "polyq/rate.hpp"
#include "polyq/reference.hpp"
#include "polyq/structure.hpp"

namespace polyq {

namespace {

constexpr std::uint64_t kTiStream = 0x7469;  // matches free_energy_ti's per-beta stream

struct CommonOpts {
    int d = 2;
    std::int64_t n = 8;
    double beta = 1.0;
    std::string law = "rademacher";
    std::uint64_t seed = 0;
    std::vector<double> pull;
    int replicas = 1;
    std::string out;
    std::string format = "csv";
};

struct McmcOpts {
    std::int64_t sweeps = 10000;
    std::int64_t burn_in = -1;
    int chains = 1;
    bool rewire = false;
    double rewire_rate = 0.05;
    double rewire_window = 8.0;
    bool cold = false;
    bool strict = false;
};

GibbsSpec make_spec(const CommonOpts& c, std::uint64_t seed) {
    GibbsSpec spec;
    spec.d = c.d;
    spec.n = c.n;
    spec.beta = c.beta;
    spec.pull = c.pull;
    spec.law = ChargeLaw::parse(c.law);
    spec.seed = seed;
    spec.validate();
    return spec;
}

McmcOptions make_mcmc_options(const McmcOpts& m) {
    McmcOptions opt;
    opt.sweeps = m.sweeps;
    opt.burn_in = m.burn_in;
    opt.chains = m.chains;
    opt.rewire = m.rewire;
    opt.rewire_rate = m.rewire_rate;
    opt.rewire_mean_window = m.rewire_window;
    opt.cold_start = m.cold;
    return opt;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) out += ';';
        out += format_double(v[k]);
    }
    return out;
}

// metadata every row carries
void stamp(nlohmann::ordered_json& rec, const CommonOpts& c, int replica) {
    rec["d"] = c.d;
    rec["n"] = c.n;
    rec["law"] = c.law;
    rec["pull"] = join_doubles(c.pull);
    rec["seed"] = c.seed;
    rec["replica"] = replica;
    rec["version"] = version_string();
}

// sink selection: file or stdout
struct Sink {
    std::ofstream file;
    std::ostream* os = &std::cout;
};

Sink open_sink(const std::string& path) {
    Sink s;
    if (!path.empty()) {
        s.file.open(path, std::ios::binary | std::ios::trunc);
        require(s.file.good(), Errc::config, "cannot open output file '" + path + "'");
        s.os = &s.file;
    }
    return s;
}

struct NamedObs {
    std::string name;
    PathObservable fn;
};

std::vector<NamedObs> parse_observables(const std::string& list, const ChargeVector& q, int d) {
    std::vector<NamedObs> out;
    std::stringstream ss(list);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        std::string name = tok, arg;
        if (auto p = tok.find(':'); p != std::string::npos) {
            name = tok.substr(0, p);
            arg = tok.substr(p + 1);
        }
        auto need_arg = [&]() {
            require(!arg.empty(), Errc::config, "observable '" + name + "' needs a ':value' argument");
            return std::stod(arg);
        };
        if (name == "h_over_n2") {
            out.push_back({tok, obs_h_over_n2()});
        } else if (name == "lstar_frac") {
            out.push_back({tok, obs_lstar_frac()});
        } else if (name == "diameter") {
            out.push_back({tok, obs_diameter()});
        } else if (name == "lstar_ge") {
            out.push_back({tok, obs_lstar_ge(need_arg())});
        } else if (name == "diam_ge") {
            out.push_back({tok, obs_diam_ge(static_cast<std::int64_t>(need_arg()))});
        } else if (name == "s_alpha" || name == "c_alpha" || name == "r_alpha") {
            require(d >= 2, Errc::config, "observable '" + name + "' needs d >= 2");
            double alpha = need_arg();
            if (name == "s_alpha") out.push_back({tok, obs_s_alpha(q, alpha)});
            if (name == "c_alpha") out.push_back({tok, obs_c_alpha(q, alpha)});
            if (name == "r_alpha") out.push_back({tok, obs_r_alpha(q, alpha)});
        } else {
            fail(Errc::config, "unknown observable '" + tok + "'");
        }
    }
    require(!out.empty(), Errc::config, "empty observable list");
    return out;
}

// ---- subcommand drivers ----------------------------------------------------

int cmd_enumerate(const CommonOpts& c, double eps, std::uint64_t budget) {
    Sink sink = open_sink(c.out);
    RecordWriter w(*sink.os, parse_format(c.format));
    EnumLimits lim;
    if (budget) lim.budget = budget;
    for (int r = 0; r < c.replicas; ++r) {
        GibbsSpec spec = make_spec(c, derive_seed(c.seed, static_cast<std::uint64_t>(r)));
        ChargeVector q = spec.draw_charges();
        PartitionResult part = spec.pulled() ? tilted_partition(spec, q, lim) : quenched_partition(spec, q, lim);
        std::vector<double> ex =
            gibbs_expectations(spec, q, {obs_h_over_n2(), obs_lstar_frac()}, lim);
        nlohmann::ordered_json rec;
        rec["beta"] = c.beta;
        rec["log_z"] = part.log_z;
        rec["f"] = part.log_z / static_cast<double>(c.n);
        rec["max_h"] = part.shifted ? part.max_h : std::nan("");
        rec["eh_over_n2"] = ex[0];
        rec["lstar_frac"] = ex[1];
        if (eps > 0.0) {
            PartitionResult tr = truncated_partition(spec, q, eps, lim);
            rec["trunc_log_z"] = tr.log_z;
            rec["trunc_share"] = std::exp(tr.log_z - part.log_z);
        } else {
            rec["trunc_log_z"] = std::nan("");
            rec["trunc_share"] = std::nan("");
        }
        rec["tv_uniform"] = tv_distance(spec, q, lim);
        stamp(rec, c, r);
        w.write(rec);
    }
    return 0;
}

int cmd_mcmc(const CommonOpts& c, const McmcOpts& m, const std::string& obs_list) {
    Sink sink = open_sink(c.out);
    RecordWriter w(*sink.os, parse_format(c.format));
    bool any_unconverged = false;
    for (int r = 0; r < c.replicas; ++r) {
        GibbsSpec spec = make_spec(c, derive_seed(c.seed, static_cast<std::uint64_t>(r)));
        ChargeVector q = spec.draw_charges();
        std::vector<NamedObs> named = parse_observables(obs_list, q, c.d);
        std::vector<PathObservable> fns;
        fns.reserve(named.size());
        for (auto& no : named) fns.push_back(no.fn);
        McmcResult res = metropolis_run(spec, q, fns, make_mcmc_options(m));
        any_unconverged = any_unconverged || res.unconverged;

        nlohmann::ordered_json rec;
        rec["beta"] = c.beta;
        for (std::size_t k = 0; k < named.size(); ++k) {
            rec[named[k].name + "_mean"] = res.obs[k].mean;
            rec[named[k].name + "_se"] = res.obs[k].se;
        }
        double tau = 1.0, acc_s = 0.0, acc_r = 0.0;
        std::int64_t burn = 0;
        for (const ChainResult& cr : res.chains) {
            tau = std::max(tau, cr.tau_h);
            acc_s += cr.acc_shift / static_cast<double>(res.chains.size());
            acc_r += cr.acc_rewire / static_cast<double>(res.chains.size());
            burn = std::max(burn, cr.burn_in_used);
        }
        rec["tau_h"] = tau;
        rec["burn_in"] = burn;
        rec["sweeps"] = m.sweeps;
        rec["chains"] = m.chains;
        rec["acc_shift"] = acc_s;
        rec["acc_rewire"] = acc_r;
        rec["unconverged"] = res.unconverged;
        stamp(rec, c, r);
        w.write(rec);
    }
    return m.strict && any_unconverged ? 4 : 0;
}

int cmd_sweep_beta(const CommonOpts& c, const McmcOpts& m, double from, double to, int points,
                   double alpha, bool emit_gp) {
    require(from == 0.0, Errc::config, "sweep-beta: thermodynamic integration needs --from 0");
    require(to > 0.0 && points >= 2, Errc::config, "sweep-beta: need --to > 0 and --steps >= 2");
    require(emit_gp ? !c.out.empty() : true, Errc::config, "--emit-gnuplot needs --out");
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k)
        grid[static_cast<std::size_t>(k)] = from + (to - from) * static_cast<double>(k) / (points - 1);

    Sink sink = open_sink(c.out);
    RecordWriter w(*sink.os, parse_format(c.format));
    bool any_unconverged = false;

    const bool events = c.d >= 2;
    for (int r = 0; r < c.replicas; ++r) {
        const std::uint64_t rseed = derive_seed(c.seed, static_cast<std::uint64_t>(r));
        GibbsSpec base = make_spec(c, rseed);
        ChargeVector q = base.draw_charges();

        std::vector<Estimate> dfdb(grid.size()), ps(grid.size()), lf(grid.size());
        bool unconv = false;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            GibbsSpec spec = base;
            spec.beta = grid[k];
            spec.seed = derive_seed(rseed, kTiStream + k);
            std::vector<PathObservable> fns{obs_h_over_n2(), obs_lstar_frac()};
            if (events) fns.push_back(obs_s_alpha(q, alpha));
            McmcResult res = metropolis_run(spec, q, fns, make_mcmc_options(m));
            dfdb[k] = res.obs[0];
            lf[k] = res.obs[1];
            if (events) ps[k] = res.obs[2];
            unconv = unconv || res.unconverged;
        }
        std::vector<Estimate> f = ti_integrate(grid, dfdb);
        any_unconverged = any_unconverged || unconv;

        for (std::size_t k = 0; k < grid.size(); ++k) {
            nlohmann::ordered_json rec;
            rec["beta"] = grid[k];
            rec["F"] = f[k].mean;
            rec["F_stderr"] = f[k].se;
            rec["EH_over_N2"] = dfdb[k].mean;
            rec["P_S_alpha"] = events ? ps[k].mean : std::nan("");
            rec["Lstar_frac_mean"] = lf[k].mean;
            rec["EH_over_N2_se"] = dfdb[k].se;
            rec["P_S_alpha_se"] = events ? ps[k].se : std::nan("");
            rec["Lstar_frac_se"] = lf[k].se;
            rec["alpha"] = alpha;
            rec["sweeps"] = m.sweeps;
            rec["unconverged"] = unconv;
            stamp(rec, c, r);
            w.write(rec);
        }
    }

    if (emit_gp) {
        std::ofstream gp(c.out + ".gp", std::ios::binary | std::ios::trunc);
        require(gp.good(), Errc::config, "cannot open gnuplot script '" + c.out + ".gp'");
        emit_gnuplot(gp, c.out, "beta", "F", "F_stderr", "free energy vs beta");
    }
    return m.strict && any_unconverged ? 4 : 0;
}

int cmd_max_energy(const CommonOpts& c, std::uint64_t budget) {
    Sink sink = open_sink(c.out);
    RecordWriter w(*sink.os, parse_format(c.format));
    EnumLimits lim;
    if (budget) lim.budget = budget;
    for (int r = 0; r < c.replicas; ++r) {
        GibbsSpec spec = make_spec(c, derive_seed(c.seed, static_cast<std::uint64_t>(r)));
        ChargeVector q = spec.draw_charges();
        MaxEnergyResult brute = brute_max_energy(q, spec.d, lim);
        nlohmann::ordered_json rec;
        rec["max_h"] = brute.max_h;
        rec["max_h_over_n2"] = brute.max_h / static_cast<double>(c.n * c.n);
        rec["argmax_count"] = brute.argmax_count;
        if (c.d >= 2) {
            const double formula = max_energy_formula(q);
            rec["formula"] = formula;
            rec["matches_formula"] =
                std::abs(brute.max_h - formula) <= 1e-9 * std::max(1.0, std::abs(formula));
            rec["strategy_h"] = energy(q, optimal_trajectory(q, spec.d));
        } else {
            rec["formula"] = std::nan("");
            rec["matches_formula"] = false;
            rec["strategy_h"] = energy(q, d1_strategy(q, +1));
        }
        stamp(rec, c, r);
        w.write(rec);
    }
    return 0;
}

int cmd_rate_fn(const CommonOpts& c, const std::vector<double>& eps_list, std::int64_t mc_n,
                std::int64_t mc_samples, bool seed_given) {
    require(!eps_list.empty(), Errc::config, "rate-fn: need at least one --eps");
    require(mc_samples == 0 || seed_given, Errc::config,
            "rate-fn: --mc-samples draws random walks; --seed is required");
    Sink sink = open_sink(c.out);
    RecordWriter w(*sink.os, parse_format(c.format));
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        const double eps = eps_list[k];
        RateResult rr = rate_function(eps, c.d);
        nlohmann::ordered_json rec;
        rec["eps"] = eps;
        rec["i_eps"] = rr.value;
        rec["u_star"] = rr.u_star;
        rec["extrapolated"] = rr.extrapolated;
        if (mc_samples > 0) {
            Estimate tail = mc_tail(c.d, mc_n, eps, mc_samples,
                                    derive_seed(c.seed, 0x6d63 + k));
            rec["mc_n"] = mc_n;
            rec["mc_samples"] = mc_samples;
            rec["mc_tail"] = tail.mean;
            rec["mc_tail_se"] = tail.se;
            const double rate = tail.mean > 0.0
                                    ? -std::log(tail.mean) / static_cast<double>(mc_n)
                                    : std::nan("");
            rec["mc_rate"] = rate;
            rec["rel_gap"] = tail.mean > 0.0 ? std::abs(rate - rr.value) / rr.value : std::nan("");
        } else {
            rec["mc_n"] = 0;
            rec["mc_samples"] = 0;
            rec["mc_tail"] = std::nan("");
            rec["mc_tail_se"] = std::nan("");
            rec["mc_rate"] = std::nan("");
            rec["rel_gap"] = std::nan("");
        }
        stamp(rec, c, 0);
        w.write(rec);
    }
    return 0;
}

int cmd_pulling(const CommonOpts& c, const McmcOpts& m, const std::vector<double>& mu,
                double beta_c_est, bool scan, double to, int points, bool seed_given) {
    Sink sink = open_sink(c.out);
    RecordWriter w(*sink.os, parse_format(c.format));
    const ChargeLaw law = ChargeLaw::parse(c.law);

    nlohmann::ordered_json rec;
    rec["lambda"] = join_doubles(c.pull);
    rec["normalizer"] = tilt_normalizer(c.pull, c.d);
    rec["step_probs"] = join_doubles(tilted_step_law(c.pull, c.d));
    BetaCBounds b = beta_c_bounds(c.pull, law, c.d);
    rec["beta_c_lower"] = b.lower;
    rec["beta_c_upper"] = b.upper;
    rec["kappa_from_grid"] = b.kappa_from_grid;
    if (!mu.empty()) {
        require(beta_c_est > 0.0, Errc::config, "pulling: --mu needs --beta-c estimate");
        rec["mu"] = join_doubles(mu);
        rec["lipschitz_gap"] = lipschitz_gap(c.pull, mu, beta_c_est, law, c.d);
    } else {
        rec["mu"] = "";
        rec["lipschitz_gap"] = std::nan("");
    }

    bool unconv = false;
    if (scan) {
        require(seed_given, Errc::config, "pulling: --scan runs MCMC; --seed is required");
        require(to > 0.0 && points >= 2, Errc::config, "pulling: scan needs --to > 0, --steps >= 2");
        std::vector<double> grid(static_cast<std::size_t>(points));
        for (int k = 0; k < points; ++k)
            grid[static_cast<std::size_t>(k)] = to * static_cast<double>(k) / (points - 1);
        GibbsSpec base = make_spec(c, c.seed);
        ChargeVector q = base.draw_charges();
        BetaCScan sc = beta_c_scan(base, q, grid, make_mcmc_options(m));
        for (const TiPoint& pt : sc.curve) unconv = unconv || pt.unconverged;
        rec["scan_found"] = sc.found;
        rec["scan_beta_lo"] = sc.beta_lo;
        rec["scan_beta_hi"] = sc.found ? sc.beta_hi : std::nan("");
    } else {
        rec["scan_found"] = false;
        rec["scan_beta_lo"] = std::nan("");
        rec["scan_beta_hi"] = std::nan("");
    }
    stamp(rec, c, 0);
    w.write(rec);
    return m.strict && unconv ? 4 : 0;
}

int cmd_selftest() {
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    };

    {  // engine vs direct-sum reference
        GibbsSpec spec;
        spec.d = 2;
        spec.n = 7;
        spec.beta = 1.3;
        spec.seed = 11;
        ChargeVector q = spec.draw_charges();
        const double a = quenched_partition(spec, q).log_z;
        const double b = reference_log_partition(spec, q);
        check("partition matches direct sum", std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)));
    }
    {  // brute max equals the four-site formula
        GibbsSpec spec;
        spec.d = 2;
        spec.n = 7;
        spec.law = ChargeLaw::gaussian();
        spec.seed = 5;
        ChargeVector q = spec.draw_charges();
        const double brute = brute_max_energy(q, spec.d).max_h;
        const double formula = max_energy_formula(q);
        check("max energy formula", std::abs(brute - formula) <= 1e-9 * std::max(1.0, formula));
    }
    {  // renewal identity for the lattice Green function
        const double g = green_function(0.7, 2);
        const double phi = first_return_mgf(0.7, 2);
        check("green renewal identity", std::abs(g * (1.0 - phi) - 1.0) <= 1e-10);
    }
    {  // tilted step law, d = 1, e^lambda = 3
        const std::vector<double> p = tilted_step_law({std::log(3.0)}, 1);
        check("tilted step law", std::abs(p[0] - 0.9) <= 1e-15 && std::abs(p[1] - 0.1) <= 1e-15);
    }
    {  // gaussian annealed partition diverges at beta = 1
        check("annealed divergence flag", annealed_partition_gaussian(2, 4, 1.0).infinite);
    }
    {  // MCMC determinism: same seed, same estimates
        GibbsSpec spec;
        spec.d = 2;
        spec.n = 8;
        spec.beta = 1.0;
        spec.seed = 3;
        ChargeVector q = spec.draw_charges();
        McmcOptions opt;
        opt.sweeps = 2000;
        opt.burn_in = 100;
        McmcResult r1 = metropolis_run(spec, q, {obs_h_over_n2()}, opt);
        McmcResult r2 = metropolis_run(spec, q, {obs_h_over_n2()}, opt);
        check("mcmc determinism", r1.obs[0].mean == r2.obs[0].mean && r1.obs[0].se == r2.obs[0].se);
    }
    std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
    return failures == 0 ? 0 : 1;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Expand `--config FILE` into subcommand flags.  The file is flat key=value
// text; a key already present on the command line is skipped (flags win).
// Unknown keys surface as unknown-option errors naming the key.
std::vector<std::string> expand_config(std::vector<std::string> tokens) {
    static const char* kSubs[] = {"enumerate", "mcmc",    "sweep-beta", "max-energy",
                                  "rate-fn",   "pulling", "selftest"};
    std::string path;
    for (std::size_t i = 0; i < tokens.size();) {
        if (tokens[i] == "--config") {
            require(i + 1 < tokens.size(), Errc::config, "--config needs a file path");
            path = tokens[i + 1];
            tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                         tokens.begin() + static_cast<std::ptrdiff_t>(i + 2));
        } else if (tokens[i].rfind("--config=", 0) == 0) {
            path = tokens[i].substr(9);
            tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }
    if (path.empty()) return tokens;

    std::size_t sub_at = tokens.size();
    for (std::size_t i = 0; i < tokens.size() && sub_at == tokens.size(); ++i)
        for (const char* s : kSubs)
            if (tokens[i] == s) sub_at = i;
    require(sub_at < tokens.size(), Errc::config, "--config needs a subcommand");

    std::ifstream in(path);
    require(in.good(), Errc::config, "cannot read config file '" + path + "'");
    std::vector<std::string> injected;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        require(eq != std::string::npos, Errc::config,
                "config line " + std::to_string(lineno) + " is not key=value: '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        require(!key.empty(), Errc::config, "config line " + std::to_string(lineno) + ": empty key");
        const std::string flag = "--" + key;
        bool overridden = false;
        for (const std::string& tok : tokens)
            overridden = overridden || tok == flag || tok.rfind(flag + "=", 0) == 0;
        if (overridden) {
            std::cerr << "note: config key '" << key << "' overridden by command-line flag\n";
            continue;
        }
        injected.push_back(flag + "=" + val);
    }
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(sub_at + 1), injected.begin(),
                  injected.end());
    return tokens;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"quenched charged-polymer lab: exact enumeration, MCMC, and bound evaluators"};
    app.require_subcommand(1);

    CommonOpts c;
    McmcOpts m;
    bool seed_given = false;

    // per-subcommand state that CLI11 fills before the callback runs
    double enum_eps = 0.0;
    std::uint64_t budget = 0;
    std::string obs_list = "h_over_n2,lstar_frac,diameter";
    double sweep_from = 0.0, sweep_to = 6.0, alpha = 0.5;
    int sweep_points = 16;
    bool emit_gp = false;
    std::vector<double> eps_list;
    std::int64_t mc_n = 1000, mc_samples = 0;
    std::vector<double> mu;
    double beta_c_est = 0.0;
    bool scan = false;
    double scan_to = 0.0;
    int scan_points = 0;

    auto add_common = [&](CLI::App* sub, bool with_beta) {
        sub->add_option("--config", "line-oriented key=value config file; flags override")
            ->type_name("FILE");
        sub->add_option("--d", c.d, "walk dimension")->capture_default_str();
        sub->add_option("--n", c.n, "number of monomers")->capture_default_str();
        if (with_beta) sub->add_option("--beta", c.beta, "inverse temperature")->capture_default_str();
        sub->add_option("--charges", c.law, "charge law: rademacher|gaussian|uniform|discrete:v:p,...")
            ->capture_default_str();
        sub->add_option("--seed", c.seed, "disorder/chain seed (required: no silent entropy)")
            ->required();
        sub->add_option("--replicas", c.replicas, "independent disorder draws")->capture_default_str();
        sub->add_option("--out", c.out, "output path (default stdout)");
        sub->add_option("--format", c.format, "csv|json")->capture_default_str();
    };
    auto add_pull = [&](CLI::App* sub) {
        sub->add_option("--pull", c.pull, "pulling field, comma-separated, d components")
            ->delimiter(',');
    };
    auto add_mcmc = [&](CLI::App* sub) {
        sub->add_option("--sweeps", m.sweeps, "measured sweeps per chain")->capture_default_str();
        sub->add_option("--burn-in", m.burn_in, "burn-in sweeps (-1: auto from pilot)")
            ->capture_default_str();
        sub->add_option("--chains", m.chains, "independent chains")->capture_default_str();
        sub->add_flag("--rewire", m.rewire, "enable fold/unfold moves");
        sub->add_option("--rewire-rate", m.rewire_rate, "fold/unfold attempts per sweep")
            ->capture_default_str();
        sub->add_option("--rewire-window", m.rewire_window, "mean fold window length")
            ->capture_default_str();
        sub->add_flag("--cold", m.cold, "start from the folded trajectory");
        sub->add_flag("--strict", m.strict, "exit 4 when any run is flagged unconverged");
    };

    int rc = 0;
    CLI::App* s_enum = app.add_subcommand("enumerate", "exact partition function and expectations");
    add_common(s_enum, true);
    add_pull(s_enum);
    s_enum->add_option("--eps", enum_eps, "also compute the L* <= eps N truncated partition");
    s_enum->add_option("--budget", budget, "path budget override");
    s_enum->callback([&] { rc = cmd_enumerate(c, enum_eps, budget); });

    CLI::App* s_mcmc = app.add_subcommand("mcmc", "Metropolis sampling of the quenched measure");
    add_common(s_mcmc, true);
    add_pull(s_mcmc);
    add_mcmc(s_mcmc);
    s_mcmc->add_option("--obs", obs_list,
                       "comma list: h_over_n2,lstar_frac,diameter,lstar_ge:f,diam_ge:l,"
                       "s_alpha:a,c_alpha:a,r_alpha:a")
        ->capture_default_str();
    s_mcmc->callback([&] { rc = cmd_mcmc(c, m, obs_list); });

    CLI::App* s_sweep = app.add_subcommand("sweep-beta", "free-energy curve and event frequencies");
    add_common(s_sweep, false);
    add_pull(s_sweep);
    add_mcmc(s_sweep);
    s_sweep->add_option("--from", sweep_from, "grid start (must be 0)")->capture_default_str();
    s_sweep->add_option("--to", sweep_to, "grid end")->capture_default_str();
    s_sweep->add_option("--steps", sweep_points, "grid points")->capture_default_str();
    s_sweep->add_option("--alpha", alpha, "event threshold for S_alpha")->capture_default_str();
    s_sweep->add_flag("--emit-gnuplot", emit_gp, "write a companion .gp script next to --out");
    s_sweep->callback(
        [&] { rc = cmd_sweep_beta(c, m, sweep_from, sweep_to, sweep_points, alpha, emit_gp); });

    CLI::App* s_max = app.add_subcommand("max-energy", "brute-force ground states vs the formula");
    add_common(s_max, false);
    s_max->add_option("--budget", budget, "path budget override");
    s_max->callback([&] { rc = cmd_max_energy(c, budget); });

    CLI::App* s_rate = app.add_subcommand("rate-fn", "local-time large-deviation rate I(eps)");
    s_rate->add_option("--config", "line-oriented key=value config file; flags override")
        ->type_name("FILE");
    s_rate->add_option("--d", c.d, "walk dimension")->capture_default_str();
    s_rate->add_option("--eps", eps_list, "local-time fractions, comma-separated")
        ->delimiter(',')
        ->required();
    s_rate->add_option("--mc-n", mc_n, "walk length for the MC tail cross-check")
        ->capture_default_str();
    s_rate->add_option("--mc-samples", mc_samples, "MC sample count (0: skip the cross-check)")
        ->capture_default_str();
    auto* rate_seed =
        s_rate->add_option("--seed", c.seed, "seed for the MC cross-check")->default_val(0);
    s_rate->add_option("--out", c.out, "output path (default stdout)");
    s_rate->add_option("--format", c.format, "csv|json")->capture_default_str();
    s_rate->callback([&] {
        seed_given = rate_seed->count() > 0;
        rc = cmd_rate_fn(c, eps_list, mc_n, mc_samples, seed_given);
    });

    CLI::App* s_pull = app.add_subcommand("pulling", "tilted walk law and beta_c bound evaluators");
    s_pull->add_option("--config", "line-oriented key=value config file; flags override")
        ->type_name("FILE");
    s_pull->add_option("--d", c.d, "walk dimension")->capture_default_str();
    s_pull->add_option("--n", c.n, "monomers (scan only)")->capture_default_str();
    s_pull->add_option("--charges", c.law, "charge law")->capture_default_str();
    s_pull->add_option("--lambda", c.pull, "pulling field, comma-separated")->delimiter(',');
    s_pull->add_option("--mu", mu, "perturbation for the Lipschitz bound")->delimiter(',');
    s_pull->add_option("--beta-c", beta_c_est, "beta_c estimate for the Lipschitz bound");
    s_pull->add_flag("--scan", scan, "bracket beta_c by a free-energy scan (MCMC)");
    s_pull->add_option("--to", scan_to, "scan grid end");
    s_pull->add_option("--steps", scan_points, "scan grid points");
    add_mcmc(s_pull);
    auto* pull_seed = s_pull->add_option("--seed", c.seed, "seed for the scan")->default_val(0);
    s_pull->add_option("--out", c.out, "output path (default stdout)");
    s_pull->add_option("--format", c.format, "csv|json")->capture_default_str();
    s_pull->callback([&] {
        seed_given = pull_seed->count() > 0;
        rc = cmd_pulling(c, m, mu, beta_c_est, scan, scan_to, scan_points, seed_given);
    });

    CLI::App* s_self = app.add_subcommand("selftest", "quick end-to-end oracle checks");
    s_self->callback([&] { rc = cmd_selftest(); });

    try {
        std::vector<std::string> tokens(argv + 1, argv + argc);
        tokens = expand_config(std::move(tokens));
        std::reverse(tokens.begin(), tokens.end());  // CLI11's vector parse pops from the back
        app.parse(std::move(tokens));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.code()) {
            case Errc::config: return 2;
            case Errc::budget: return 3;
            default: return 1;
        }
    }
    return rc;
}

}  // namespace polyq
