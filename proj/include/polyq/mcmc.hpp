#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "polyq/estimate.hpp"
#include "polyq/exact.hpp"
#include "polyq/gibbs.hpp"
#include "polyq/rng.hpp"
#include "polyq/walk.hpp"

namespace polyq {

// One Metropolis chain at fixed disorder.  The workhorse move replaces one
// increment and rigidly translates the suffix; an optional fold/unfold pair
// jumps between spread and four-site configurations while keeping exact
// stationarity (the reverse proposal is a uniformly sampled lattice bridge,
// counted by dynamic programming).
class Chain {
public:
    Chain(const GibbsSpec& spec, const ChargeVector& q, const Walk& start, std::uint64_t seed);

    const GibbsSpec& spec() const { return spec_; }
    std::int64_t n() const { return spec_.n; }
    int d() const { return spec_.d; }
    double h() const { return h_; }
    const std::vector<std::int32_t>& positions() const { return pos_; }
    PathView view() const { return PathView{spec_.d, spec_.n, pos_.data(), h_, lstar_}; }

    // energy change if increment i were replaced by step code c (state untouched)
    double peek_suffix_shift(std::int64_t i, int code);
    // apply unconditionally (tests and cold restarts)
    void apply_suffix_shift(std::int64_t i, int code);

    // one sweep: N-1 Metropolis suffix-shift proposals (+ scheduled rewires);
    // refreshes the cached energy and the max local time, and verifies the
    // incremental energy against the refreshed one
    void sweep();

    struct Counters {
        std::int64_t proposed_shift = 0, accepted_shift = 0;
        std::int64_t proposed_rewire = 0, accepted_rewire = 0, inapplicable_rewire = 0;
    };
    const Counters& counters() const { return counters_; }

    void enable_rewire(double attempts_per_sweep, double mean_window);
    std::int64_t lstar() const { return lstar_; }

private:
    struct FoldPlan;
    double site_q(const std::int32_t* x) const;
    std::int32_t site_l(const std::int32_t* x) const;
    void add_monomer(std::int64_t i, const std::int32_t* x);
    void remove_monomer(std::int64_t i, const std::int32_t* x);
    void refresh();
    void try_rewire();
    bool plan_fold(std::int64_t a, std::int64_t b, FoldPlan& plan);
    double bridge_count(const std::int32_t* from, const std::int32_t* to, std::int64_t steps);
    bool sample_bridge(const std::int32_t* from, const std::int32_t* to, std::int64_t steps,
                       std::vector<std::int32_t>& out);

    GibbsSpec spec_;
    ChargeVector q_;
    Rng rng_;
    std::vector<std::int32_t> pos_;   // n x d
    std::vector<Step> steps_;
    double h_ = 0.0;
    std::int64_t lstar_ = 0;

    bool dense_ = false;
    std::int64_t side_ = 0, shift_ = 0;
    std::vector<std::int64_t> strides_;
    std::vector<double> grid_q_;
    std::vector<std::int32_t> grid_l_;
    std::unordered_map<std::uint64_t, std::pair<double, std::int32_t>> map_;

    bool rewire_ = false;
    double rewire_rate_ = 0.05;
    double rewire_mean_window_ = 8.0;
    Counters counters_;

    // scratch
    std::vector<double> dp_fwd_, dp_bwd_;
    std::vector<std::int32_t> scratch_pos_;
};

struct McmcOptions {
    std::int64_t sweeps = 10000;   // measured sweeps
    std::int64_t burn_in = -1;     // -1: pilot run, burn 10x autocorrelation time
    int chains = 1;
    bool rewire = false;
    double rewire_rate = 0.05;
    double rewire_mean_window = 8.0;
    bool cold_start = false;       // start folded (optimal trajectory) instead of uniform
};

struct ChainResult {
    std::vector<Estimate> obs;
    double tau_h = 1.0;            // autocorrelation time of the energy trace
    std::int64_t burn_in_used = 0;
    double acc_shift = 0.0;
    double acc_rewire = 0.0;
    bool unconverged = false;      // tau_h > sweeps / 50
};

struct McmcResult {
    std::vector<Estimate> obs;     // pooled over chains
    std::vector<ChainResult> chains;
    bool unconverged = false;
};

// Samples P_N^beta (tilted when spec.pull is set) and estimates every
// observable with batch-means errors.  Chain c uses derive_seed(spec.seed, c);
// results are deterministic for fixed (spec, q, options).
McmcResult metropolis_run(const GibbsSpec& spec, const ChargeVector& q,
                          const std::vector<PathObservable>& obs, const McmcOptions& opt = {});

// F_N(beta) = (1/N) ln Z_N by thermodynamic integration of dF/dbeta =
// E[H/N^2] along an increasing beta grid starting at 0.
struct TiPoint {
    double beta = 0.0;
    Estimate f;       // integrated free energy
    Estimate dfdb;    // measured derivative E[H/N^2]
    bool unconverged = false;
};
std::vector<TiPoint> free_energy_ti(const GibbsSpec& base, const ChargeVector& q,
                                    const std::vector<double>& beta_grid, const McmcOptions& opt = {});

// trapezoid integration of measured derivatives along the grid, with error
// propagation from the per-point standard errors
std::vector<Estimate> ti_integrate(const std::vector<double>& grid, const std::vector<Estimate>& dfdb);

// ready-made observables (shared between exact enumeration and MCMC)
PathObservable obs_h_over_n2();
PathObservable obs_lstar_frac();
PathObservable obs_diameter();
PathObservable obs_lstar_ge(double frac);
PathObservable obs_diam_ge(std::int64_t l);
PathObservable obs_step_is(int monomer, const std::vector<std::int32_t>& site);
// event observables need the frozen charges
PathObservable obs_s_alpha(const ChargeVector& q, double alpha);
PathObservable obs_c_alpha(const ChargeVector& q, double alpha);
PathObservable obs_r_alpha(const ChargeVector& q, double alpha);

}  // namespace polyq
