#pragma once

#include <cstdint>
#include <vector>

#include "polyq/estimate.hpp"
#include "polyq/exact.hpp"
#include "polyq/gibbs.hpp"

namespace polyq {

// Deliberately independent re-implementations used as oracles by the test
// suite and `selftest`: scalar path loops instead of the incremental engine,
// series instead of quadrature, plain MC instead of exact sums.  Slow on
// purpose; keep sizes small.

// log Z via PathIterator + a fresh occupation field per path
double reference_log_partition(const GibbsSpec& spec, const ChargeVector& q,
                               const EnumLimits& lim = {});

// E[obs] the same way
double reference_expectation(const GibbsSpec& spec, const ChargeVector& q,
                             const PathObservable& obs, const EnumLimits& lim = {});

// same pair built from the interaction form: weights exp(beta Hhat_N / N)
// with Hhat the i<j double sum; the measure equals the squared-charge one at
// half the temperature
double reference_log_partition_interaction(const GibbsSpec& spec, const ChargeVector& q,
                                           const EnumLimits& lim = {});
double reference_expectation_interaction(const GibbsSpec& spec, const ChargeVector& q,
                                         const PathObservable& obs, const EnumLimits& lim = {});

// truncated return-probability series sum_{k<=kmax} e^{-uk} P{S_k=0} with
// exact binomial probabilities (d=1) and the two-independent-walks identity
// (d=2); d >= 3 unsupported
double green_series(double u, int d, int kmax = 200);

// E e^{-u tau_1} by renewal inversion of the return-probability sequence:
// f_k = p_k - sum_{0<j<k} f_j p_{k-j}
double first_return_series(double u, int d, int kmax = 200);

// closed form for d=1: phi = 1 - sqrt(1 - e^{-2u})
double first_return_closed_d1(double u);

// exact P{tau_m <= n-1} for the d=1 walk (m-fold convolution of the first
// return law); equals P{L_n^0 > m'} for m = m'
double excursion_tail_exact_d1(std::int64_t n, std::int64_t m);

// MC estimate of E e^{-u tau_1}; excursions longer than cap contribute 0
// (their weight is below e^{-u cap})
Estimate mc_first_return_mgf(double u, int d, std::int64_t samples, std::uint64_t seed,
                             std::int64_t cap = 0);

// MC estimate of P{L_n^0 > alpha n} under the tilted step law
Estimate mc_tilted_tail(const std::vector<double>& lambda, int d, std::int64_t n, double alpha,
                        std::int64_t samples, std::uint64_t seed);

// beta = 0 endpoint law of S_{n-1} for d=1: exact binomial profile, returned
// as (coordinate, probability) sorted by coordinate
std::vector<std::pair<std::int32_t, double>> endpoint_binomial_d1(std::int64_t n);

}  // namespace polyq
