#pragma once

#include <cstdint>
#include <vector>

#include "polyq/charge_law.hpp"
#include "polyq/errors.hpp"

namespace polyq {

// One quenched polymer experiment: walk dimension and length, inverse
// temperature (weights exp(beta H_N / N)), optional pulling field lambda
// (extra weight exp(lambda . S_{N-1})), charge law and disorder seed.
struct GibbsSpec {
    int d = 2;
    std::int64_t n = 8;
    double beta = 1.0;
    std::vector<double> pull;  // empty means zero
    ChargeLaw law = ChargeLaw::rademacher();
    std::uint64_t seed = 1;

    void validate() const {
        require(d >= 1, Errc::config, "spec: d must be >= 1");
        require(n >= 1, Errc::config, "spec: n must be >= 1");
        require(pull.empty() || static_cast<int>(pull.size()) == d, Errc::config,
                "spec: pulling field must have d components");
    }

    bool pulled() const {
        for (double x : pull)
            if (x != 0.0) return true;
        return false;
    }

    double pull_at(int axis) const { return pull.empty() ? 0.0 : pull[static_cast<std::size_t>(axis)]; }

    ChargeVector draw_charges() const { return sample_charges(law, n, seed); }
};

}  // namespace polyq
