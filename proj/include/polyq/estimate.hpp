#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace polyq {

// point estimate with an error bar from correlated samples
struct Estimate {
    double mean = 0.0;
    double se = 0.0;        // standard error of the mean
    std::int64_t n = 0;     // samples used
    double tau = 1.0;       // integrated autocorrelation time, >= 1 convention
    std::string method;     // "batch_means", "iid", "pooled"

    double lo(double z = 3.0) const { return mean - z * se; }
    double hi(double z = 3.0) const { return mean + z * se; }
};

// standard error via non-overlapping batch means; robust to autocorrelation
// once batches are longer than a few tau
Estimate batch_means(const std::vector<double>& x, int target_batches = 64);

// plain iid mean/stderr
Estimate iid_estimate(const std::vector<double>& x);

// integrated autocorrelation time with the self-consistent window
// M = min{m : m >= c tau(m)}; tau = 1 + 2 sum_{k<=M} rho_k, so white noise
// gives tau ~ 1.  Returns 1 for degenerate (constant or tiny) traces.
double sokal_tau(const std::vector<double>& x, double window_factor = 5.0);

// combine estimates from independent equal-length chains
Estimate pooled(const std::vector<Estimate>& parts);

// mean/stderr of an iid Bernoulli sample given hit count
Estimate bernoulli_estimate(std::int64_t hits, std::int64_t trials);

}  // namespace polyq
