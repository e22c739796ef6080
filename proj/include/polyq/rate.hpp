#pragma once

#include <cstdint>
#include <vector>

#include "polyq/estimate.hpp"

namespace polyq {

// default midpoint-rule resolution per axis; the integrand is smooth and
// 2pi-periodic, so the midpoint rule converges spectrally
int default_quadrature_points(int d);

// lattice Green function g(u) = (2pi)^{-d} int dxi / (1 - G(xi) e^{-u}),
// G(xi) = (1/d) sum_j cos xi_j; equals sum_k e^{-uk} P{S_k = 0}
double green_function(double u, int d, int points_per_axis = 0);

// Richardson gauge: |g_M - g_{M/2}|
double green_function_error(double u, int d, int points_per_axis = 0);

// E e^{-u tau_1} for the first return time tau_1, via the renewal identity
// green = 1/(1 - phi); computed as m/(1+m) with m = green - 1 accumulated
// directly, so large-u values keep full precision
double first_return_mgf(double u, int d, int points_per_axis = 0);

// d/du E e^{-u tau_1}, from the differentiated quadrature (tests cross-check
// against central differences)
double first_return_mgf_deriv(double u, int d, int points_per_axis = 0);

// mean excursion length under the tilt e^{-u tau}: -phi'/phi, strictly
// decreasing from (possibly) infinity down to 2
double tilt_mean(double u, int d, int points_per_axis = 0);

struct RateResult {
    double value = 0.0;      // I(eps)
    double u_star = 0.0;     // tilt with tilt_mean(u*) = 1/eps
    bool extrapolated = false;  // u* hit the low-u floor; value is a boundary evaluation
};

// large-deviation rate of P{L_N^0 > eps N}: with R(u) = -ln phi(u) - u tilt_mean(u),
// I(eps) = eps R(u*) where tilt_mean(u*) = 1/eps (eps N excursions, each tilted)
RateResult rate_function(double eps, int d, int points_per_axis = 0);

// plain Monte Carlo estimate of P{L_N^0 > eps N} under the free walk
Estimate mc_tail(int d, std::int64_t n, double eps, std::int64_t samples, std::uint64_t seed);

// alpha ln E e^{lambda . S_1}: analytic lower bound on the pulled-walk rate
// at local-time level alpha
double pulled_rate_bound(const std::vector<double>& lambda, double alpha, int d);

}  // namespace polyq
