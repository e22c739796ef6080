#include "polyq/pulling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyq/errors.hpp"
#include "polyq/rate.hpp"

namespace polyq {

double tilt_normalizer(const std::vector<double>& lambda, int d) {
    require(d >= 1, Errc::config, "tilt: d must be >= 1");
    require(lambda.empty() || static_cast<int>(lambda.size()) == d, Errc::config,
            "tilt: lambda must have d components");
    if (lambda.empty()) return 1.0;
    double s = 0.0;
    for (double l : lambda) s += std::cosh(l);
    return s / static_cast<double>(d);
}

std::vector<double> tilted_step_law(const std::vector<double>& lambda, int d) {
    const double m = tilt_normalizer(lambda, d);
    const double denom = 2.0 * static_cast<double>(d) * m;
    std::vector<double> p(static_cast<std::size_t>(2 * d));
    for (int j = 0; j < d; ++j) {
        const double l = lambda.empty() ? 0.0 : lambda[static_cast<std::size_t>(j)];
        p[static_cast<std::size_t>(2 * j)] = std::exp(l) / denom;
        p[static_cast<std::size_t>(2 * j + 1)] = std::exp(-l) / denom;
    }
    return p;
}

BetaCBounds beta_c_bounds(const std::vector<double>& lambda, const ChargeLaw& law, int d) {
    const double log_m = std::log(tilt_normalizer(lambda, d));
    const ChargeMoments cm = charge_moments(law);
    const double denom = cm.e_q_plus * cm.e_q_plus + cm.e_q_minus * cm.e_q_minus;
    require(denom > 0.0, Errc::unsupported, "beta_c_bounds: degenerate signed means");

    BetaCBounds out;
    out.kappa_from_grid = cm.kappa_from_grid;
    const double inv_sqrt_kappa = 1.0 / std::sqrt(cm.kappa);
    out.lower = inv_sqrt_kappa * std::max(std::sqrt(log_m / denom), inv_sqrt_kappa);

    double linf = 0.0;
    for (double l : lambda) linf = std::max(linf, std::abs(l));
    const double doubling = d == 1 ? 2.0 : 1.0;
    out.upper = (2.0 * std::log(2.0 * d) * doubling + 4.0 * linf) / denom;
    return out;
}

double lipschitz_gap(const std::vector<double>& lambda, const std::vector<double>& mu,
                     double beta_c_estimate, const ChargeLaw& law, int d) {
    require(beta_c_estimate > 0.0, Errc::precondition, "lipschitz_gap: beta_c estimate must be positive");
    require(mu.empty() || static_cast<int>(mu.size()) == d, Errc::config,
            "lipschitz_gap: mu must have d components");
    double mu_inf = 0.0;
    for (double m : mu) mu_inf = std::max(mu_inf, std::abs(m));
    if (mu_inf == 0.0) return 0.0;

    const ChargeMoments cm = charge_moments(law);
    const double alpha = 1.0 / (2.0 * cm.kappa * beta_c_estimate);
    const double fprime_lb = pulled_rate_bound(lambda, alpha, d) / beta_c_estimate;
    if (fprime_lb <= 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * mu_inf / fprime_lb;
}

BetaCScan beta_c_scan(const GibbsSpec& base, const ChargeVector& q,
                      const std::vector<double>& beta_grid, const McmcOptions& opt) {
    BetaCScan out;
    out.curve = free_energy_ti(base, q, beta_grid, opt);
    for (const TiPoint& pt : out.curve) {
        if (!out.found && pt.beta > 0.0 && pt.f.mean > 3.0 * pt.f.se) {
            out.found = true;
            out.beta_hi = pt.beta;
        }
        if (!out.found) out.beta_lo = pt.beta;
    }
    return out;
}

}  // namespace polyq
