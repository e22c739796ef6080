#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "polyq/field.hpp"
#include "polyq/gibbs.hpp"
#include "polyq/walk.hpp"

namespace polyq {

struct EnumLimits {
    std::uint64_t budget = 1ull << 26;  // maximum number of paths to visit
    int threads = 0;                    // 0 = use thread_budget()
};

// (2d)^(N-1) with overflow guard
std::uint64_t total_paths(int d, std::int64_t n_monomers);

// Odometer over all (2d)^(N-1) increment sequences, ascending in the integer
// whose base-2d digits are the step codes (step 0 most significant).
// Restartable via seek(); disjoint index ranges shard the path space.
class PathIterator {
public:
    PathIterator(int d, std::int64_t n_monomers);
    std::uint64_t count() const { return count_; }
    std::uint64_t index() const { return idx_; }
    void seek(std::uint64_t index);
    bool next(Walk& out);  // false when exhausted

private:
    int d_;
    std::int64_t n_;
    std::uint64_t idx_ = 0;
    std::uint64_t count_;
};

// leaf passed to observables during enumeration
struct PathView {
    int d = 1;
    std::int64_t n = 1;
    const std::int32_t* pos = nullptr;  // n x d row-major
    double h = 0.0;                     // H_N
    std::int64_t lstar = 0;             // max local time
    std::int64_t diameter() const;
    std::vector<std::int32_t> positions_vec() const { return {pos, pos + n * d}; }
};

using PathObservable = std::function<double(const PathView&)>;

struct PartitionResult {
    double log_z = 0.0;  // always finite
    double z = 1.0;      // may overflow to +inf for huge beta H / N
    double h_ref = 0.0;  // weight shift used: weights exp(beta (H - h_ref)/N)
    double max_h = 0.0;  // max_S H_N, filled when the shift pass ran
    bool shifted = false;
};

PartitionResult quenched_partition(const GibbsSpec& spec, const ChargeVector& q, const EnumLimits& lim = {});

// partition restricted to L* <= eps N
PartitionResult truncated_partition(const GibbsSpec& spec, const ChargeVector& q, double eps,
                                    const EnumLimits& lim = {});

// normalized expectations of one or many observables under the quenched
// Gibbs measure; a single enumeration evaluates all of them
double gibbs_expectation(const GibbsSpec& spec, const ChargeVector& q, const PathObservable& obs,
                         const EnumLimits& lim = {});
std::vector<double> gibbs_expectations(const GibbsSpec& spec, const ChargeVector& q,
                                       const std::vector<PathObservable>& obs, const EnumLimits& lim = {});

// total variation distance between the Gibbs measure and the uniform walk law
double tv_distance(const GibbsSpec& spec, const ChargeVector& q, const EnumLimits& lim = {});

// E Z_N(beta) for gaussian charges: (2d)^{-(N-1)} sum over paths of
// prod_x (1 - 2 beta L^x / N)^{-1/2}; infinite as soon as one path has a
// site with 2 beta L^x >= N.
struct AnnealedResult {
    double value = 0.0;
    bool infinite = false;
};
AnnealedResult annealed_partition_gaussian(int d, std::int64_t n, double beta, const EnumLimits& lim = {});

struct MaxEnergyResult {
    double max_h = 0.0;
    Walk argmax;
    std::uint64_t argmax_count = 0;  // number of maximizing paths
};
MaxEnergyResult brute_max_energy(const ChargeVector& q, int d, const EnumLimits& lim = {});

// endpoint law of S_{N-1} under the Gibbs measure, sorted by coordinates
std::vector<std::pair<std::vector<std::int32_t>, double>> endpoint_law(const GibbsSpec& spec,
                                                                       const ChargeVector& q,
                                                                       const EnumLimits& lim = {});

// partition function under the pulled walk measure: weights are products of
// tilted step probabilities exp(lambda.e)/(2d E exp(lambda.S_1)) times
// exp(beta H/N).  With lambda = 0 this calls quenched_partition unchanged.
PartitionResult tilted_partition(const GibbsSpec& spec, const ChargeVector& q, const EnumLimits& lim = {});

// convenience bundle holding one fully enumerated ensemble
struct ExactGibbs {
    GibbsSpec spec;
    ChargeVector q;
    PartitionResult z;
    static ExactGibbs compute(const GibbsSpec& spec, const EnumLimits& lim = {});
    double expectation(const PathObservable& obs, const EnumLimits& lim = {}) const;
};

}  // namespace polyq
