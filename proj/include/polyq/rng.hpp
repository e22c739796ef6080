#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace polyq {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stable sub-stream derivation: one master seed, one integer stream id.
// Used for per-chain / per-replica seeds so results do not depend on the
// number of worker threads.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0xD1B54A32D192ED03ull * (stream + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

// mt19937_64 plus explicit sampling helpers.  std::*_distribution output is
// implementation-defined, which would break the byte-identical-output
// contract, so all draws go through the methods below.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed ? seed : 0x9E3779B97F4A7C15ull) {}

    std::uint64_t bits() { return eng_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // unbiased integer in [0, n), rejection from the top 32 bits
    std::uint32_t below(std::uint32_t n) {
        const std::uint64_t span = 0x100000000ull;
        const std::uint64_t bound = span - span % n;
        for (;;) {
            std::uint64_t r = eng_() >> 32;
            if (r < bound) return static_cast<std::uint32_t>(r % n);
        }
    }

    bool coin() { return (eng_() >> 63) != 0; }

    // standard normal, Marsaglia polar with one cached mate
    double normal() {
        if (has_cache_) {
            has_cache_ = false;
            return cache_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        cache_ = v * f;
        has_cache_ = true;
        return u * f;
    }

private:
    std::mt19937_64 eng_;
    double cache_ = 0.0;
    bool has_cache_ = false;
};

}  // namespace polyq
