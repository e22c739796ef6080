#include "polyq/reference.hpp"

#include <cmath>

#include "polyq/errors.hpp"
#include "polyq/field.hpp"
#include "polyq/rng.hpp"
#include "polyq/util.hpp"
#include "polyq/walk.hpp"

namespace polyq {

namespace {

std::uint64_t checked_total(int d, std::int64_t n, const EnumLimits& lim) {
    const std::uint64_t total = total_paths(d, n);
    require(total <= lim.budget, Errc::budget, "reference enumeration exceeds the path budget");
    return total;
}

// shared scalar loop: weight = exp(beta E(path)/N) with E either H or Hhat
template <class EnergyFn>
double scalar_log_partition(const GibbsSpec& spec, const ChargeVector& q, const EnumLimits& lim,
                            EnergyFn energy_of) {
    spec.validate();
    require(!spec.pulled(), Errc::unsupported, "reference evaluator: pulled specs not supported");
    require(static_cast<std::int64_t>(q.q.size()) == spec.n, Errc::precondition,
            "reference evaluator: charge count must match N");
    checked_total(spec.d, spec.n, lim);
    PathIterator it(spec.d, spec.n);
    Walk w(spec.d, {});
    Kahan z;
    while (it.next(w)) z.add(std::exp(spec.beta * energy_of(w) / static_cast<double>(spec.n)));
    return std::log(z.get()) - static_cast<double>(spec.n - 1) * std::log(2.0 * spec.d);
}

template <class EnergyFn>
double scalar_expectation(const GibbsSpec& spec, const ChargeVector& q, const PathObservable& obs,
                          const EnumLimits& lim, EnergyFn energy_of) {
    spec.validate();
    require(!spec.pulled(), Errc::unsupported, "reference evaluator: pulled specs not supported");
    require(static_cast<std::int64_t>(q.q.size()) == spec.n, Errc::precondition,
            "reference evaluator: charge count must match N");
    checked_total(spec.d, spec.n, lim);
    PathIterator it(spec.d, spec.n);
    Walk w(spec.d, {});
    Kahan z, num;
    while (it.next(w)) {
        const double weight = std::exp(spec.beta * energy_of(w) / static_cast<double>(spec.n));
        const std::vector<std::int32_t> pos = w.positions();
        const OccupationField f = OccupationField::build(q, pos, spec.d);
        const PathView v{spec.d, spec.n, pos.data(), energy(q, w), f.max_local_time()};
        z.add(weight);
        num.add(weight * obs(v));
    }
    return num.get() / z.get();
}

// exact d=1 first-return probabilities P(tau_1 = 2k) via the ratio
// f_{2(k+1)} = f_{2k} (2k-1)/(2k+2), f_2 = 1/2
std::vector<double> first_return_law_d1(std::int64_t kmax) {
    std::vector<double> f(static_cast<std::size_t>(kmax + 1), 0.0);
    double cur = 0.5;
    for (std::int64_t k = 1; k <= kmax; ++k) {
        f[static_cast<std::size_t>(k)] = cur;
        cur *= static_cast<double>(2 * k - 1) / static_cast<double>(2 * k + 2);
    }
    return f;
}

// P{S_{2m} = 0}: d=1 by the ratio p_{2(m+1)} = p_{2m} (2m+1)/(2m+2); d=2 is
// the square (the rotated walk splits into two independent d=1 walks)
std::vector<double> return_probs(int d, std::int64_t mmax) {
    require(d == 1 || d == 2, Errc::unsupported, "return-probability series: d must be 1 or 2");
    std::vector<double> p(static_cast<std::size_t>(mmax + 1), 0.0);
    double cur = 1.0;
    for (std::int64_t m = 0; m <= mmax; ++m) {
        p[static_cast<std::size_t>(m)] = d == 1 ? cur : cur * cur;
        cur *= static_cast<double>(2 * m + 1) / static_cast<double>(2 * m + 2);
    }
    return p;
}

}  // namespace

double reference_log_partition(const GibbsSpec& spec, const ChargeVector& q, const EnumLimits& lim) {
    return scalar_log_partition(spec, q, lim, [&](const Walk& w) { return energy(q, w); });
}

double reference_expectation(const GibbsSpec& spec, const ChargeVector& q, const PathObservable& obs,
                             const EnumLimits& lim) {
    return scalar_expectation(spec, q, obs, lim, [&](const Walk& w) { return energy(q, w); });
}

double reference_log_partition_interaction(const GibbsSpec& spec, const ChargeVector& q,
                                           const EnumLimits& lim) {
    return scalar_log_partition(spec, q, lim, [&](const Walk& w) { return interaction_energy(q, w); });
}

double reference_expectation_interaction(const GibbsSpec& spec, const ChargeVector& q,
                                         const PathObservable& obs, const EnumLimits& lim) {
    return scalar_expectation(spec, q, obs, lim, [&](const Walk& w) { return interaction_energy(q, w); });
}

double green_series(double u, int d, int kmax) {
    require(u > 0.0, Errc::precondition, "green series: u must be positive");
    const std::int64_t mmax = kmax / 2;
    const std::vector<double> p = return_probs(d, mmax);
    Kahan s;
    for (std::int64_t m = mmax; m >= 0; --m)
        s.add(p[static_cast<std::size_t>(m)] * std::exp(-2.0 * u * static_cast<double>(m)));
    return s.get();
}

double first_return_series(double u, int d, int kmax) {
    require(u > 0.0, Errc::precondition, "first return series: u must be positive");
    const std::int64_t mmax = kmax / 2;
    const std::vector<double> p = return_probs(d, mmax);
    // renewal inversion: f_m = p_m - sum_{0<j<m} f_j p_{m-j}  (indices in units of 2 steps)
    std::vector<double> f(static_cast<std::size_t>(mmax + 1), 0.0);
    for (std::int64_t m = 1; m <= mmax; ++m) {
        double v = p[static_cast<std::size_t>(m)];
        for (std::int64_t j = 1; j < m; ++j) v -= f[static_cast<std::size_t>(j)] * p[static_cast<std::size_t>(m - j)];
        f[static_cast<std::size_t>(m)] = v;
    }
    Kahan s;
    for (std::int64_t m = mmax; m >= 1; --m)
        s.add(f[static_cast<std::size_t>(m)] * std::exp(-2.0 * u * static_cast<double>(m)));
    return s.get();
}

double first_return_closed_d1(double u) {
    require(u > 0.0, Errc::precondition, "first return closed form: u must be positive");
    return 1.0 - std::sqrt(-std::expm1(-2.0 * u));
}

double excursion_tail_exact_d1(std::int64_t n, std::int64_t m) {
    require(n >= 1 && m >= 0, Errc::precondition, "excursion tail: bad arguments");
    if (m == 0) return 1.0;  // S_0 = 0 is always a visit
    const std::int64_t kmax = (n - 1) / 2;  // returns happen at even times <= n-1
    if (m > kmax) return 0.0;               // m returns take at least 2m steps
    const std::vector<double> f = first_return_law_d1(kmax);
    std::vector<double> dist = f;
    std::vector<double> next(static_cast<std::size_t>(kmax + 1), 0.0);
    for (std::int64_t r = 2; r <= m; ++r) {
        std::fill(next.begin(), next.end(), 0.0);
        // truncated convolution: mass beyond kmax is exactly the part we discard
        for (std::int64_t j = r - 1; j <= kmax; ++j) {
            const double dj = dist[static_cast<std::size_t>(j)];
            if (dj == 0.0) continue;
            for (std::int64_t k = 1; j + k <= kmax; ++k)
                next[static_cast<std::size_t>(j + k)] += dj * f[static_cast<std::size_t>(k)];
        }
        dist.swap(next);
    }
    Kahan s;
    for (std::int64_t k = kmax; k >= m; --k) s.add(dist[static_cast<std::size_t>(k)]);
    return s.get();
}

Estimate mc_first_return_mgf(double u, int d, std::int64_t samples, std::uint64_t seed, std::int64_t cap) {
    require(u > 0.0 && d >= 1 && samples >= 1, Errc::precondition, "mc first return: bad arguments");
    if (cap <= 0) {
        cap = static_cast<std::int64_t>(std::ceil(50.0 / u));
        cap += cap & 1;
        if (cap < 2) cap = 2;
        if (cap > 1000000) cap = 1000000;
    }
    Rng rng(seed);
    std::vector<double> vals(static_cast<std::size_t>(samples), 0.0);
    std::vector<std::int32_t> pos(static_cast<std::size_t>(d));
    for (std::int64_t s = 0; s < samples; ++s) {
        std::fill(pos.begin(), pos.end(), 0);
        int nonzero = 0;
        for (std::int64_t t = 1; t <= cap; ++t) {
            const auto code = static_cast<int>(rng.below(static_cast<std::uint32_t>(2 * d)));
            auto& x = pos[static_cast<std::size_t>(code >> 1)];
            const std::int32_t before = x;
            x += (code & 1) ? -1 : 1;
            nonzero += (x != 0) - (before != 0);
            if (nonzero == 0) {
                vals[static_cast<std::size_t>(s)] = std::exp(-u * static_cast<double>(t));
                break;
            }
        }
    }
    return iid_estimate(vals);
}

Estimate mc_tilted_tail(const std::vector<double>& lambda, int d, std::int64_t n, double alpha,
                        std::int64_t samples, std::uint64_t seed) {
    require(d >= 1 && n >= 1 && samples >= 1, Errc::precondition, "mc tilted tail: bad arguments");
    require(lambda.empty() || static_cast<int>(lambda.size()) == d, Errc::precondition,
            "mc tilted tail: lambda must have d components");
    // cumulative step law e^{lambda.e}/(2d E e^{lambda.S_1})
    std::vector<double> cdf(static_cast<std::size_t>(2 * d), 0.0);
    double tot = 0.0;
    for (int code = 0; code < 2 * d; ++code) {
        const double lam = lambda.empty() ? 0.0 : lambda[static_cast<std::size_t>(code >> 1)];
        tot += std::exp((code & 1) ? -lam : lam);
        cdf[static_cast<std::size_t>(code)] = tot;
    }
    for (auto& c : cdf) c /= tot;

    const double thresh = alpha * static_cast<double>(n);
    Rng rng(seed);
    std::int64_t hits = 0;
    std::vector<std::int32_t> pos(static_cast<std::size_t>(d));
    for (std::int64_t s = 0; s < samples; ++s) {
        std::fill(pos.begin(), pos.end(), 0);
        std::int64_t visits = 1;
        int nonzero = 0;
        for (std::int64_t i = 1; i < n; ++i) {
            const double r = rng.uniform();
            int code = 0;
            while (code + 1 < 2 * d && r >= cdf[static_cast<std::size_t>(code)]) ++code;
            auto& x = pos[static_cast<std::size_t>(code >> 1)];
            const std::int32_t before = x;
            x += (code & 1) ? -1 : 1;
            nonzero += (x != 0) - (before != 0);
            if (nonzero == 0) ++visits;
        }
        if (static_cast<double>(visits) > thresh) ++hits;
    }
    return bernoulli_estimate(hits, samples);
}

std::vector<std::pair<std::int32_t, double>> endpoint_binomial_d1(std::int64_t n) {
    require(n >= 1, Errc::precondition, "binomial endpoint: n must be >= 1");
    const std::int64_t steps = n - 1;
    std::vector<std::pair<std::int32_t, double>> out;
    double c = std::pow(0.5, static_cast<double>(steps));  // C(steps, 0) / 2^steps
    for (std::int64_t j = 0; j <= steps; ++j) {
        out.emplace_back(static_cast<std::int32_t>(2 * j - steps), c);
        c *= static_cast<double>(steps - j) / static_cast<double>(j + 1);
    }
    return out;
}

}  // namespace polyq
