#pragma once

#include <vector>

#include "polyq/charge_law.hpp"
#include "polyq/gibbs.hpp"
#include "polyq/mcmc.hpp"

namespace polyq {

// E e^{lambda . S_1} = (1/d) sum_j cosh lambda_j (= 1 at lambda = 0)
double tilt_normalizer(const std::vector<double>& lambda, int d);

// step-code-indexed probabilities of the tilted walk:
// P{step = +-e_j} = e^{+-lambda_j} / (2d E e^{lambda . S_1})
std::vector<double> tilted_step_law(const std::vector<double>& lambda, int d);

// Bounds on the folding transition point of the pulled polymer.  The lower
// bound keeps the published nested max, whose kappa^{-1/2} * kappa^{-1/2}
// shape is dimensionally odd; callers surface `kappa_from_grid` so reports
// can flag grid-estimated subgaussian constants.
struct BetaCBounds {
    double lower = 0.0;
    double upper = 0.0;
    bool kappa_from_grid = false;
};
BetaCBounds beta_c_bounds(const std::vector<double>& lambda, const ChargeLaw& law, int d);

// bound on |beta_c(lambda + mu) - beta_c(lambda)| given an estimate of
// beta_c(lambda): 2 max_j |mu_j| / F', with F' bounded below by the pulled
// rate at local-time level 1/(2 kappa beta_c) divided by beta_c.  Infinite
// when the rate bound vanishes (lambda = 0).
double lipschitz_gap(const std::vector<double>& lambda, const std::vector<double>& mu,
                     double beta_c_estimate, const ChargeLaw& law, int d);

// beta_c has no closed form: scan the free energy over a beta grid and
// bracket the first point where F clears three standard errors
struct BetaCScan {
    std::vector<TiPoint> curve;
    bool found = false;
    double beta_lo = 0.0;  // largest grid beta with F <= 3 se
    double beta_hi = 0.0;  // first grid beta with F > 3 se (valid when found)
};
BetaCScan beta_c_scan(const GibbsSpec& base, const ChargeVector& q,
                      const std::vector<double>& beta_grid, const McmcOptions& opt = {});

}  // namespace polyq
