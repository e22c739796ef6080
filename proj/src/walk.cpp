#include "polyq/walk.hpp"

#include <cstdlib>
#include <limits>

#include "polyq/errors.hpp"

namespace polyq {

Walk::Walk(int d, std::vector<Step> steps) : d_(d), steps_(std::move(steps)) {
    require(d >= 1, Errc::precondition, "walk: dimension must be >= 1");
    for (const Step& s : steps_)
        require(s.axis < d && (s.dir == 1 || s.dir == -1), Errc::precondition, "walk: invalid step");
}

Walk Walk::straight(int d, std::int64_t n_monomers) {
    require(n_monomers >= 1, Errc::precondition, "walk: need at least one monomer");
    std::vector<Step> st(static_cast<std::size_t>(n_monomers - 1), Step{0, +1});
    return Walk(d, std::move(st));
}

Walk Walk::uniform(int d, std::int64_t n_monomers, Rng& rng) {
    require(n_monomers >= 1, Errc::precondition, "walk: need at least one monomer");
    std::vector<Step> st(static_cast<std::size_t>(n_monomers - 1));
    for (auto& s : st) s = step_from_code(static_cast<int>(rng.below(static_cast<std::uint32_t>(2 * d))));
    return Walk(d, std::move(st));
}

Walk Walk::from_positions(int d, const std::vector<std::int32_t>& pos) {
    require(d >= 1 && pos.size() % d == 0 && !pos.empty(), Errc::precondition, "walk: bad position array");
    std::int64_t n = static_cast<std::int64_t>(pos.size()) / d;
    for (int k = 0; k < d; ++k)
        require(pos[static_cast<std::size_t>(k)] == 0, Errc::precondition, "walk: S_0 must be the origin");
    std::vector<Step> st;
    st.reserve(static_cast<std::size_t>(n - 1));
    for (std::int64_t i = 0; i + 1 < n; ++i) {
        int axis = -1, dir = 0, nonzero = 0;
        for (int k = 0; k < d; ++k) {
            int delta = pos[static_cast<std::size_t>((i + 1) * d + k)] - pos[static_cast<std::size_t>(i * d + k)];
            if (delta != 0) {
                ++nonzero;
                axis = k;
                dir = delta;
            }
        }
        require(nonzero == 1 && std::abs(dir) == 1, Errc::precondition, "walk: positions not unit-step connected");
        st.push_back(Step{static_cast<std::uint8_t>(axis), static_cast<std::int8_t>(dir)});
    }
    return Walk(d, std::move(st));
}

std::vector<std::int32_t> Walk::positions() const {
    std::int64_t n = monomers();
    std::vector<std::int32_t> pos(static_cast<std::size_t>(n * d_), 0);
    for (std::int64_t i = 1; i < n; ++i) {
        for (int k = 0; k < d_; ++k) pos[static_cast<std::size_t>(i * d_ + k)] = pos[static_cast<std::size_t>((i - 1) * d_ + k)];
        const Step& s = steps_[static_cast<std::size_t>(i - 1)];
        pos[static_cast<std::size_t>(i * d_ + s.axis)] += s.dir;
    }
    return pos;
}

std::int64_t diameter_l1(const std::int32_t* pos, std::int64_t n, int d) {
    require(d >= 1 && n >= 1 && pos != nullptr, Errc::precondition, "diameter: bad position array");
    std::int64_t best = 0;
    // 2^{d-1} sign patterns (sigma and -sigma give the same spread)
    for (std::uint32_t mask = 0; mask < (1u << (d - 1)); ++mask) {
        std::int64_t lo = std::numeric_limits<std::int64_t>::max();
        std::int64_t hi = std::numeric_limits<std::int64_t>::min();
        for (std::int64_t i = 0; i < n; ++i) {
            std::int64_t dot = pos[i * d];
            for (int k = 1; k < d; ++k) {
                std::int64_t sgn = (mask >> (k - 1)) & 1 ? -1 : +1;
                dot += sgn * pos[i * d + k];
            }
            lo = std::min(lo, dot);
            hi = std::max(hi, dot);
        }
        best = std::max(best, hi - lo);
    }
    return best;
}

std::int64_t diameter_l1(const std::vector<std::int32_t>& pos, int d) {
    require(d >= 1 && pos.size() % d == 0 && !pos.empty(), Errc::precondition, "diameter: bad position array");
    return diameter_l1(pos.data(), static_cast<std::int64_t>(pos.size()) / d, d);
}

std::int64_t diameter_l1(const Walk& w) { return diameter_l1(w.positions(), w.dim()); }

}  // namespace polyq
