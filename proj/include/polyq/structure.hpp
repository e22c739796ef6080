#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "polyq/field.hpp"
#include "polyq/gibbs.hpp"
#include "polyq/walk.hpp"

namespace polyq {

// Argmax site of eps * Q^x over sites of one lattice parity.  When no visited
// site has eps Q > 0 the argmax is attained at unvisited sites (Q = 0); we
// then return the lexicographically smallest unvisited site of that parity
// inside the visited bounding box expanded by 2, which always contains one.
struct ArgmaxPoint {
    std::array<std::int32_t, kMaxFieldDim> x{};
    double value = 0.0;      // eps * Q at the chosen site, >= 0
    bool degenerate = false; // max attained at more than one visited site
    bool fallback = false;   // unvisited site used
};

struct ArgmaxPoints {
    int d = 2;
    ArgmaxPoint p[2][2];  // [parity][0:+, 1:-]
    const ArgmaxPoint& at(int parity, int sign) const { return p[parity & 1][sign > 0 ? 0 : 1]; }
    ArgmaxPoint& at(int parity, int sign) { return p[parity & 1][sign > 0 ? 0 : 1]; }
};

ArgmaxPoints argmax_points(const OccupationField& field, const std::vector<std::int32_t>& pos, int d);

// D_N = sum_{eps,p} Q_eps^p (Q_eps^p - eps Q^{x_eps^p});  nonnegative, zero
// exactly on configurations that put every signed parity class on its argmax.
double distance_to_optimality(const ParitySignSums& sums, const ArgmaxPoints& points);

// sum over the four signed parity classes of (Q_eps^p)^2; equals max_S H_N
// for d >= 2
double max_energy_formula(const ChargeVector& q);

// The four-site walk achieving the d >= 2 maximum: even monomers at (0,0)/(1,1),
// odd monomers at (0,1)/(1,0) by charge sign, extra axes pinned to 0; the two
// even sites swap roles when q_0 < 0 so that S_0 stays at the origin.
// Zero charges ride with the "+" site.
Walk optimal_trajectory(const ChargeVector& q, int d);

// d = 1 lower-bound strategy: odd monomers sit at +-1 by charge sign; an even
// monomer goes to the +-2 cell behind its neighbours when both neighbours
// agree and its charge sign matches eps, else to 0.
Walk d1_strategy(const ChargeVector& q, int eps);

// Lower bound on D_N from a nonadjacent (odd, even) argmax pair:
//   sum over odd i of min(Q_eps^odd q_i^eps, Q_eps'^even q_{i-1}^eps').
// Also reports the empirical folding constants
//   Gamma = min_{eps,p} (Q_eps^p)^2,  Lambda = min_{eps,eps'} of the sum above.
struct GapBound {
    bool applicable = false;  // some cross-parity pair is nonadjacent
    double bound = 0.0;       // best valid lower bound on D_N (0 if inapplicable)
    int pair_eps_odd = +1;
    int pair_eps_even = +1;
    double gamma_emp = 0.0;
    double lambda_emp = 0.0;
};

GapBound lambda_gap_bound(const ChargeVector& q, const ArgmaxPoints& points);

// Unit square {v, v+e_a, v+e_a+e_b, v+e_b}, a < b, v the minimal corner.
struct UnitSquare {
    std::array<std::int32_t, kMaxFieldDim> corner{};
    int axis_a = 0;
    int axis_b = 1;
};

// S_alpha: a unique unit square carries all but (1-alpha)/2 of the absolute
// charge; C_alpha: each signed parity class concentrates (1+alpha)/2 of its
// mass on its argmax site and the four argmax sites form a unit square.
struct EventRecord {
    bool s_alpha = false;
    bool c_alpha = false;
    int qualifying_squares = 0;
    std::optional<UnitSquare> square;   // set when s_alpha
    std::int64_t r_alpha = 0;           // first monomer index inside the square; N when no square
    bool argmax_degenerate = false;
};

EventRecord detect_events(const ChargeVector& q, const std::vector<std::int32_t>& pos, int d, double alpha);
EventRecord detect_events(const ChargeVector& q, const Walk& w, double alpha);

// N^2 exp( L [ ln(2d) - 2 beta alpha sqrt(Gamma) qbar_L / N ] ): predicted
// ceiling for P{ Diam >= L+1, C_alpha }.
double diam_log_bound(const ChargeVector& q, int d, double beta, double alpha, std::int64_t L);

}  // namespace polyq
