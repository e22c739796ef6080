#include "polyq/estimate.hpp"

#include <algorithm>
#include <cmath>

#include "polyq/errors.hpp"
#include "polyq/util.hpp"

namespace polyq {

namespace {

double mean_of(const std::vector<double>& x) {
    Kahan s;
    for (double v : x) s.add(v);
    return s.get() / static_cast<double>(x.size());
}

}  // namespace

Estimate iid_estimate(const std::vector<double>& x) {
    require(!x.empty(), Errc::precondition, "estimate: empty sample");
    Estimate e;
    e.n = static_cast<std::int64_t>(x.size());
    e.mean = mean_of(x);
    if (x.size() > 1) {
        Kahan ss;
        for (double v : x) ss.add((v - e.mean) * (v - e.mean));
        const double var = ss.get() / static_cast<double>(x.size() - 1);
        e.se = std::sqrt(std::max(0.0, var) / static_cast<double>(x.size()));
    }
    e.method = "iid";
    return e;
}

Estimate batch_means(const std::vector<double>& x, int target_batches) {
    require(x.size() >= 4, Errc::precondition, "batch means: need at least 4 samples");
    require(target_batches >= 2, Errc::precondition, "batch means: need at least 2 batches");
    const auto n = static_cast<std::int64_t>(x.size());
    std::int64_t nb = std::min<std::int64_t>(target_batches, n / 2);
    const std::int64_t len = n / nb;  // drop the remainder at the front (early samples)
    const std::int64_t skip = n - nb * len;

    std::vector<double> bm(static_cast<std::size_t>(nb));
    for (std::int64_t b = 0; b < nb; ++b) {
        Kahan s;
        for (std::int64_t i = 0; i < len; ++i) s.add(x[static_cast<std::size_t>(skip + b * len + i)]);
        bm[static_cast<std::size_t>(b)] = s.get() / static_cast<double>(len);
    }
    Estimate e = iid_estimate(bm);
    e.n = n;
    // tau from variance inflation: Var(mean) = s^2 tau / n, so tau = n se^2 / s^2.
    // O(n), unlike an autocorrelation scan, and adequate for convergence flags.
    Kahan mu, ss;
    for (double v : x) mu.add(v);
    const double m = mu.get() / static_cast<double>(n);
    for (double v : x) ss.add((v - m) * (v - m));
    const double s2 = ss.get() / static_cast<double>(n - 1);
    e.tau = s2 > 0.0 ? std::max(1.0, static_cast<double>(n) * e.se * e.se / s2) : 1.0;
    e.method = "batch_means";
    return e;
}

double sokal_tau(const std::vector<double>& x, double window_factor) {
    const auto n = static_cast<std::int64_t>(x.size());
    if (n < 8) return 1.0;
    const double mu = mean_of(x);
    Kahan v0;
    for (double v : x) v0.add((v - mu) * (v - mu));
    const double c0 = v0.get() / static_cast<double>(n);
    if (!(c0 > 0.0)) return 1.0;

    const std::int64_t kmax = std::min<std::int64_t>(n - 2, n / 2);
    double tau = 1.0;
    for (std::int64_t m = 1; m <= kmax; ++m) {
        Kahan ck;
        for (std::int64_t i = 0; i + m < n; ++i)
            ck.add((x[static_cast<std::size_t>(i)] - mu) * (x[static_cast<std::size_t>(i + m)] - mu));
        const double rho = ck.get() / static_cast<double>(n - m) / c0;
        tau += 2.0 * rho;
        if (static_cast<double>(m) >= window_factor * tau) break;
    }
    return std::max(1.0, tau);
}

Estimate pooled(const std::vector<Estimate>& parts) {
    require(!parts.empty(), Errc::precondition, "pooled estimate: no parts");
    Estimate e;
    Kahan mean, var;
    double tau = 1.0;
    for (const Estimate& p : parts) {
        mean.add(p.mean);
        var.add(p.se * p.se);
        e.n += p.n;
        tau = std::max(tau, p.tau);
    }
    const auto k = static_cast<double>(parts.size());
    e.mean = mean.get() / k;
    e.se = std::sqrt(var.get()) / k;
    e.tau = tau;
    e.method = "pooled";
    return e;
}

Estimate bernoulli_estimate(std::int64_t hits, std::int64_t trials) {
    require(trials >= 1 && hits >= 0 && hits <= trials, Errc::precondition, "bernoulli estimate: bad counts");
    Estimate e;
    e.n = trials;
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    e.mean = p;
    e.se = std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(trials)) / static_cast<double>(trials));
    e.method = "iid";
    return e;
}

}  // namespace polyq
