#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <thread>

namespace polyq {

// Neumaier-compensated accumulator; used for all big reductions so results
// do not depend on summation noise or thread count.
struct Kahan {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double get() const { return s + c; }
};

// worker cap: min(hardware, POLYQ_THREADS if set); at least 1
inline int thread_budget() {
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw == 0 ? 1 : static_cast<int>(hw);
    if (const char* env = std::getenv("POLYQ_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n < 1 ? 1 : n;
}

}  // namespace polyq
