#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "polyq/charge_law.hpp"
#include "polyq/errors.hpp"
#include "polyq/exact.hpp"
#include "polyq/field.hpp"
#include "polyq/gibbs.hpp"
#include "polyq/mcmc.hpp"
#include "polyq/rng.hpp"
#include "polyq/structure.hpp"
#include "polyq/walk.hpp"

using namespace polyq;

namespace {

GibbsSpec make_spec(int d, std::int64_t n, double beta, const ChargeLaw& law, std::uint64_t seed) {
    GibbsSpec s;
    s.d = d;
    s.n = n;
    s.beta = beta;
    s.law = law;
    s.seed = seed;
    return s;
}

// |mcmc - exact| in units of the mcmc error bar
double sigmas(const Estimate& e, double exact) {
    return std::abs(e.mean - exact) / (e.se > 0.0 ? e.se : 1e-300);
}

}  // namespace

TEST_CASE("peeked energy differences match applied moves exactly") {
    const GibbsSpec s = make_spec(2, 12, 1.0, ChargeLaw::rademacher(), 6);
    const ChargeVector q = s.draw_charges();
    Rng rng(3);
    Chain chain(s, q, Walk::uniform(2, 12, rng), 99);
    for (int rep = 0; rep < 200; ++rep) {
        const std::int64_t i = rng.below(11);
        const int code = static_cast<int>(rng.below(4));
        const double before = chain.h();
        const std::vector<std::int32_t> pos_before = chain.positions();
        const double dh = chain.peek_suffix_shift(i, code);
        CHECK(chain.h() == before);                 // peek must not touch state
        CHECK(chain.positions() == pos_before);
        chain.apply_suffix_shift(i, code);
        CHECK(chain.h() == before + dh);            // integer charges: exact
        // full rebuild agrees with the incremental bookkeeping
        const Walk w = Walk::from_positions(2, chain.positions());
        CHECK(energy(q, w) == chain.h());
    }
    // the max local time is refreshed per sweep, not per raw move
    chain.sweep();
    const OccupationField f = OccupationField::build(q, Walk::from_positions(2, chain.positions()));
    CHECK(f.max_local_time() == chain.lstar());
}

TEST_CASE("peek and apply stay consistent with real-valued charges") {
    const GibbsSpec s = make_spec(3, 10, 0.5, ChargeLaw::gaussian(), 4);
    const ChargeVector q = s.draw_charges();
    Rng rng(8);
    Chain chain(s, q, Walk::uniform(3, 10, rng), 12);
    for (int rep = 0; rep < 100; ++rep) {
        const std::int64_t i = rng.below(9);
        const int code = static_cast<int>(rng.below(6));
        const double dh = chain.peek_suffix_shift(i, code);
        const double before = chain.h();
        chain.apply_suffix_shift(i, code);
        CHECK(chain.h() == doctest::Approx(before + dh).epsilon(1e-10));
        const Walk w = Walk::from_positions(3, chain.positions());
        CHECK(chain.h() == doctest::Approx(energy(q, w)).epsilon(1e-9));
    }
}

TEST_CASE("sweeps are deterministic in the chain seed") {
    const GibbsSpec s = make_spec(2, 16, 2.0, ChargeLaw::rademacher(), 5);
    const ChargeVector q = s.draw_charges();
    Rng r1(1), r2(1);
    Chain a(s, q, Walk::uniform(2, 16, r1), 42);
    Chain b(s, q, Walk::uniform(2, 16, r2), 42);
    a.enable_rewire(0.2, 6.0);
    b.enable_rewire(0.2, 6.0);
    for (int t = 0; t < 60; ++t) {
        a.sweep();
        b.sweep();
    }
    CHECK(a.positions() == b.positions());
    CHECK(a.h() == b.h());
    CHECK(a.counters().accepted_shift == b.counters().accepted_shift);
    CHECK(a.counters().accepted_rewire == b.counters().accepted_rewire);

    Chain c(s, q, Walk::uniform(2, 16, r1), 43);  // different seed decouples
    for (int t = 0; t < 60; ++t) c.sweep();
    CHECK(c.positions() != a.positions());
}

TEST_CASE("proposal counters track the schedule") {
    const GibbsSpec s = make_spec(2, 10, 1.0, ChargeLaw::rademacher(), 7);
    const ChargeVector q = s.draw_charges();
    Rng rng(2);
    Chain chain(s, q, Walk::uniform(2, 10, rng), 11);
    for (int t = 0; t < 30; ++t) chain.sweep();
    CHECK(chain.counters().proposed_shift == 30 * 9);
    CHECK(chain.counters().accepted_shift <= chain.counters().proposed_shift);
    CHECK(chain.counters().proposed_rewire == 0);  // not enabled
    CHECK_THROWS_AS(chain.enable_rewire(1.5, 8.0), Error);
    CHECK_THROWS_AS(chain.enable_rewire(0.1, 0.5), Error);
}

TEST_CASE("local moves sample the exact Gibbs measure on the line") {
    const GibbsSpec s = make_spec(1, 6, 1.5, ChargeLaw::rademacher(), 13);
    const ChargeVector q = s.draw_charges();
    const std::vector<PathObservable> obs = {obs_h_over_n2(), obs_lstar_frac(), obs_diameter()};
    const std::vector<double> exact = gibbs_expectations(s, q, obs);
    McmcOptions opt;
    opt.sweeps = 40000;
    opt.chains = 2;
    const McmcResult res = metropolis_run(s, q, obs, opt);
    REQUIRE(res.obs.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        INFO("observable ", k, ": mcmc ", res.obs[k].mean, " +- ", res.obs[k].se, " exact ", exact[k]);
        CHECK(sigmas(res.obs[k], exact[k]) < 4.0);
        CHECK(res.obs[k].se < 0.05 * std::max(1.0, std::abs(exact[k])));
    }
    CHECK(!res.unconverged);
}

TEST_CASE("fold moves keep the stationary law at strong coupling") {
    const GibbsSpec s = make_spec(2, 8, 5.0, ChargeLaw::rademacher(), 21);
    const ChargeVector q = s.draw_charges();
    const std::vector<PathObservable> obs = {obs_h_over_n2(), obs_lstar_frac()};
    const std::vector<double> exact = gibbs_expectations(s, q, obs);
    McmcOptions opt;
    opt.sweeps = 60000;
    opt.chains = 2;
    opt.rewire = true;
    opt.rewire_rate = 0.2;
    opt.rewire_mean_window = 6.0;
    const McmcResult res = metropolis_run(s, q, obs, opt);
    for (std::size_t k = 0; k < 2; ++k) {
        INFO("observable ", k, ": mcmc ", res.obs[k].mean, " +- ", res.obs[k].se, " exact ", exact[k]);
        CHECK(sigmas(res.obs[k], exact[k]) < 4.0);
    }
    // the rewire channel must actually fire to be tested at all
    std::int64_t rewires = 0;
    for (const ChainResult& c : res.chains) rewires += static_cast<std::int64_t>(c.acc_rewire > 0.0);
    CHECK(rewires >= 1);
}

TEST_CASE("pulled chains sample the tilted measure") {
    GibbsSpec s = make_spec(2, 7, 0.8, ChargeLaw::rademacher(), 9);
    s.pull = {0.4, 0.0};
    const ChargeVector q = s.draw_charges();
    const PathObservable end_x = [](const PathView& v) {
        return static_cast<double>(v.pos[(v.n - 1) * v.d]);
    };
    const std::vector<PathObservable> obs = {obs_h_over_n2(), end_x};
    const std::vector<double> exact = gibbs_expectations(s, q, obs);
    CHECK(exact[1] > 0.5);  // the pull visibly stretches the endpoint
    McmcOptions opt;
    opt.sweeps = 40000;
    opt.chains = 2;
    const McmcResult res = metropolis_run(s, q, obs, opt);
    CHECK(sigmas(res.obs[0], exact[0]) < 4.0);
    CHECK(sigmas(res.obs[1], exact[1]) < 4.0);
}

TEST_CASE("chain results are independent of how many chains run alongside") {
    const GibbsSpec s = make_spec(2, 8, 1.0, ChargeLaw::rademacher(), 30);
    const ChargeVector q = s.draw_charges();
    const std::vector<PathObservable> obs = {obs_h_over_n2()};
    McmcOptions one;
    one.sweeps = 500;
    one.burn_in = 100;
    one.chains = 1;
    McmcOptions two = one;
    two.chains = 3;
    const McmcResult a = metropolis_run(s, q, obs, one);
    const McmcResult b = metropolis_run(s, q, obs, two);
    CHECK(a.chains[0].obs[0].mean == b.chains[0].obs[0].mean);
    CHECK(a.chains[0].obs[0].se == b.chains[0].obs[0].se);
}

TEST_CASE("trapezoid integration of measured slopes propagates error bars") {
    std::vector<Estimate> dfdb(3);
    dfdb[0].mean = 0.0;
    dfdb[1].mean = 1.0;
    dfdb[2].mean = 2.0;
    dfdb[0].se = 0.0;
    dfdb[1].se = 0.03;
    dfdb[2].se = 0.04;
    const std::vector<double> grid = {0.0, 1.0, 2.0};
    const std::vector<Estimate> f = ti_integrate(grid, dfdb);
    REQUIRE(f.size() == 3);
    CHECK(f[0].mean == 0.0);
    CHECK(f[1].mean == doctest::Approx(0.5).epsilon(1e-15));  // exact for a linear slope
    CHECK(f[2].mean == doctest::Approx(2.0).epsilon(1e-15));
    // weights: midpoints get the average of adjacent gaps, endpoints half a gap
    CHECK(f[2].se == doctest::Approx(std::sqrt(1.0 * 0.03 * 0.03 + 0.25 * 0.04 * 0.04)).epsilon(1e-12));
    CHECK(f[1].se <= f[2].se);
    CHECK_THROWS_AS(ti_integrate({0.0, 1.0}, dfdb), Error);
}

TEST_CASE("integrated free energy matches the exact one on a small system") {
    const GibbsSpec base = make_spec(1, 6, 0.0, ChargeLaw::rademacher(), 19);
    const ChargeVector q = base.draw_charges();
    const std::vector<double> grid = {0.0, 0.4, 0.8, 1.2, 1.6, 2.0};
    McmcOptions opt;
    opt.sweeps = 20000;
    opt.chains = 2;
    const std::vector<TiPoint> curve = free_energy_ti(base, q, grid, opt);
    REQUIRE(curve.size() == grid.size());
    CHECK(curve[0].f.mean == 0.0);
    CHECK(curve[0].f.se == 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        GibbsSpec s = base;
        s.beta = grid[k];
        const double exact_f = quenched_partition(s, q).log_z / 6.0;
        INFO("beta ", grid[k], ": ti ", curve[k].f.mean, " +- ", curve[k].f.se, " exact ", exact_f);
        CHECK(std::abs(curve[k].f.mean - exact_f) <
              std::max(0.01, 4.0 * curve[k].f.se + 2e-3));  // noise + trapezoid bias
    }
}

TEST_CASE("thermodynamic integration rejects malformed grids") {
    const GibbsSpec base = make_spec(1, 5, 0.0, ChargeLaw::rademacher(), 2);
    const ChargeVector q = base.draw_charges();
    CHECK_THROWS_AS(free_energy_ti(base, q, {}, {}), Error);
    CHECK_THROWS_AS(free_energy_ti(base, q, {0.5, 1.0}, {}), Error);
    CHECK_THROWS_AS(free_energy_ti(base, q, {0.0, 1.0, 1.0}, {}), Error);
    McmcOptions opt;
    opt.sweeps = 4;  // below the minimum
    CHECK_THROWS_AS(metropolis_run(base, q, {obs_h_over_n2()}, opt), Error);
}

TEST_CASE("cold starts begin in the folded state") {
    const GibbsSpec s = make_spec(2, 20, 400.0, ChargeLaw::rademacher(), 23);
    const ChargeVector q = s.draw_charges();
    const std::vector<PathObservable> obs = {obs_h_over_n2()};
    McmcOptions opt;
    opt.sweeps = 200;
    opt.burn_in = 0;
    opt.cold_start = true;
    const McmcResult res = metropolis_run(s, q, obs, opt);
    // at this coupling the folded state is essentially absorbing, so the
    // energy stays at (or above) the cold-start value throughout
    const double opt_h = max_energy_formula(q) / 400.0;
    CHECK(res.obs[0].mean == doctest::Approx(opt_h).epsilon(0.05));
}

TEST_CASE("ready-made observables read the path view correctly") {
    // balanced signs in both parity classes keep the qualifying square unique
    ChargeVector q;
    q.integer_valued = true;
    for (int i = 0; i < 12; ++i) q.q.push_back(i % 4 < 2 ? 1.0 : -1.0);
    const Walk folded = optimal_trajectory(q, 2);
    const std::vector<std::int32_t> pos = folded.positions();
    const OccupationField f = OccupationField::build(q, folded);
    const PathView v{2, 12, pos.data(), f.energy(), f.max_local_time()};

    CHECK(obs_h_over_n2()(v) == doctest::Approx(f.energy() / 144.0));
    CHECK(obs_lstar_frac()(v) == doctest::Approx(static_cast<double>(f.max_local_time()) / 12.0));
    CHECK(obs_diameter()(v) == doctest::Approx(2.0));  // unit square
    CHECK(obs_diam_ge(3)(v) == 0.0);
    CHECK(obs_diam_ge(2)(v) == 1.0);
    CHECK(obs_lstar_ge(0.1)(v) == 1.0);
    CHECK(obs_s_alpha(q, 0.5)(v) == 1.0);
    CHECK(obs_c_alpha(q, 0.5)(v) == 1.0);
    CHECK(obs_r_alpha(q, 0.5)(v) == 0.0);

    const std::vector<std::int32_t> site0 = {pos[0], pos[1]};
    CHECK(obs_step_is(0, site0)(v) == 1.0);
    const std::vector<std::int32_t> far = {90, 90};
    CHECK(obs_step_is(5, far)(v) == 0.0);

    const Walk line = Walk::straight(1, 12);
    const std::vector<std::int32_t> lpos = line.positions();
    const PathView v1{1, 12, lpos.data(), 12.0, 1};
    CHECK_THROWS_AS(obs_s_alpha(q, 0.5)(v1), Error);  // square events need d >= 2
}
