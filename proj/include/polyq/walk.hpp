#pragma once

#include <cstdint>
#include <vector>

#include "polyq/rng.hpp"

namespace polyq {

// one nearest-neighbour increment +-e_axis
struct Step {
    std::uint8_t axis;
    std::int8_t dir;  // +1 or -1
};

inline bool operator==(Step a, Step b) { return a.axis == b.axis && a.dir == b.dir; }

// step <-> code in [0, 2d): code = 2*axis + (dir<0)
inline int step_code(Step s) { return 2 * s.axis + (s.dir < 0 ? 1 : 0); }
inline Step step_from_code(int code) {
    return Step{static_cast<std::uint8_t>(code / 2), static_cast<std::int8_t>(code % 2 ? -1 : +1)};
}

// N monomers S_0 = 0, S_1, ..., S_{N-1} on Z^d, i.e. N-1 unit steps.
class Walk {
public:
    Walk(int d, std::vector<Step> steps);
    static Walk straight(int d, std::int64_t n_monomers);
    static Walk uniform(int d, std::int64_t n_monomers, Rng& rng);
    static Walk from_positions(int d, const std::vector<std::int32_t>& pos);  // validates unit steps

    int dim() const { return d_; }
    std::int64_t monomers() const { return static_cast<std::int64_t>(steps_.size()) + 1; }
    const std::vector<Step>& steps() const { return steps_; }

    // row-major N x d positions
    std::vector<std::int32_t> positions() const;

private:
    int d_;
    std::vector<Step> steps_;
};

// L1 diameter of the visited set: max over sign patterns sigma of
// (max sigma.x - min sigma.x), since |x-y|_1 = max_sigma sigma.(x-y).
std::int64_t diameter_l1(const std::int32_t* pos, std::int64_t n, int d);
std::int64_t diameter_l1(const std::vector<std::int32_t>& pos, int d);
std::int64_t diameter_l1(const Walk& w);

}  // namespace polyq
