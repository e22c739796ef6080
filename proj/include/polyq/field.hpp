#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "polyq/charge_law.hpp"
#include "polyq/walk.hpp"

namespace polyq {

// Sites are packed 16 bits per axis (biased by 2^15).  Coordinates of an
// N-monomer walk are bounded by N-1, so the packing is valid for N < 32768;
// up to 4 axes fit one 64-bit key.
constexpr int kMaxFieldDim = 4;
constexpr std::int32_t kCoordLimit = 32768;

inline std::uint64_t pack_site(const std::int32_t* x, int d) {
    std::uint64_t key = 0;
    for (int k = 0; k < d; ++k)
        key |= static_cast<std::uint64_t>(static_cast<std::uint16_t>(x[k] + 0x8000)) << (16 * k);
    return key;
}

inline void unpack_site(std::uint64_t key, int d, std::int32_t* out) {
    for (int k = 0; k < d; ++k)
        out[k] = static_cast<std::int32_t>(static_cast<std::uint16_t>(key >> (16 * k))) - 0x8000;
}

struct SiteStat {
    std::int32_t visits = 0;   // L^x
    double charge = 0.0;       // Q^x
    double abs_charge = 0.0;   // sum of |q_i| over monomers at x
};

// Local time / local charge field of one (q, S) configuration.
class OccupationField {
public:
    using Map = std::unordered_map<std::uint64_t, SiteStat>;

    static OccupationField build(const ChargeVector& q, const Walk& w);
    static OccupationField build(const ChargeVector& q, const std::vector<std::int32_t>& pos, int d);

    int dim() const { return d_; }
    const Map& sites() const { return sites_; }
    std::int64_t total_visits() const;
    std::int64_t max_local_time() const;  // L*
    double energy() const;                // sum_x (Q^x)^2
    const SiteStat* find(std::uint64_t key) const;

private:
    int d_ = 1;
    Map sites_;
};

// H_N via the field
double energy(const ChargeVector& q, const Walk& w);

// Hhat_N = sum_{i<j} q_i q_j 1{S_i=S_j}, by the literal O(N^2) double sum.
// Kept quadratic on purpose: it is the independent cross-check for the
// field-based energy through H = 2 Hhat + sum q_i^2.
double interaction_energy(const ChargeVector& q, const Walk& w);

// Q_eps^p = sum over monomers of parity p of the eps-signed charge part.
struct ParitySignSums {
    double s[2][2] = {{0, 0}, {0, 0}};  // [parity][0:+, 1:-]
    double at(int parity, int sign) const { return s[parity & 1][sign > 0 ? 0 : 1]; }
    double sum_all() const { return s[0][0] + s[0][1] + s[1][0] + s[1][1]; }
};

ParitySignSums parity_sign_sums(const ChargeVector& q);

// min over windows of length l in [L, N) starting at i in [0, N-l) of the
// mean of |q| over the window
double qbar(const ChargeVector& q, std::int64_t L);

}  // namespace polyq
