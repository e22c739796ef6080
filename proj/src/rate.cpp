#include "polyq/rate.hpp"

#include <cmath>

#include "polyq/errors.hpp"
#include "polyq/rng.hpp"
#include "polyq/util.hpp"

namespace polyq {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kUFloor = 1e-4;  // below this the integrand spike defeats the quadrature

struct GreenParts {
    double m1 = 0.0;     // green - 1 = mean of s G/(1 - s G)
    double dgdu = 0.0;   // d green / du = mean of -s G/(1 - s G)^2
};

// tensor midpoint rule, accumulated so that green-1 (not green) is the sum:
// full precision at large u where green -> 1
GreenParts green_parts(double u, int d, int m) {
    require(u > 0.0, Errc::precondition, "green function: u must be positive");
    require(d >= 1, Errc::precondition, "green function: d must be >= 1");
    const double s = std::exp(-u);
    std::vector<double> c(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) c[static_cast<std::size_t>(i)] = std::cos(-kPi + (i + 0.5) * 2.0 * kPi / m);

    Kahan acc1, acc2;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    std::vector<double> prefix(static_cast<std::size_t>(d + 1), 0.0);
    for (;;) {
        for (int k = 0; k < d; ++k)
            prefix[static_cast<std::size_t>(k + 1)] =
                prefix[static_cast<std::size_t>(k)] + c[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])];
        // innermost axis unrolled: prefix[d-1] fixed, last index sweeps
        const double base = prefix[static_cast<std::size_t>(d - 1)];
        for (int i = 0; i < m; ++i) {
            const double g = (base + c[static_cast<std::size_t>(i)]) / d;
            const double sg = s * g;
            const double den = 1.0 - sg;
            acc1.add(sg / den);
            acc2.add(-sg / (den * den));
        }
        int k = d - 2;
        while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == m) {
            idx[static_cast<std::size_t>(k)] = 0;
            --k;
        }
        if (k < 0) break;
    }
    double scale = 1.0;
    for (int k = 0; k < d; ++k) scale /= m;
    return {acc1.get() * scale, acc2.get() * scale};
}

int points_for(int d, int points_per_axis) {
    if (points_per_axis > 0) return points_per_axis;
    return default_quadrature_points(d);
}

double r_of(double u, int d, int m) {
    const GreenParts p = green_parts(u, d, m);
    const double log_phi = std::log(p.m1) - std::log1p(p.m1);
    const double g = p.m1 + 1.0;
    const double tilt = -p.dgdu / (g * p.m1);  // -phi'/phi with phi = m1/g, phi' = g'/g^2
    return -log_phi - u * tilt;
}

}  // namespace

int default_quadrature_points(int d) {
    switch (d) {
        case 1: return 4096;
        case 2: return 512;
        case 3: return 96;
        default: return 48;
    }
}

double green_function(double u, int d, int points_per_axis) {
    return 1.0 + green_parts(u, d, points_for(d, points_per_axis)).m1;
}

double green_function_error(double u, int d, int points_per_axis) {
    const int m = points_for(d, points_per_axis);
    const double hi = green_parts(u, d, m).m1;
    const double lo = green_parts(u, d, m / 2).m1;
    return std::abs(hi - lo);
}

double first_return_mgf(double u, int d, int points_per_axis) {
    const GreenParts p = green_parts(u, d, points_for(d, points_per_axis));
    return p.m1 / (1.0 + p.m1);
}

double first_return_mgf_deriv(double u, int d, int points_per_axis) {
    const GreenParts p = green_parts(u, d, points_for(d, points_per_axis));
    const double g = 1.0 + p.m1;
    return p.dgdu / (g * g);  // phi = 1 - 1/g
}

double tilt_mean(double u, int d, int points_per_axis) {
    const GreenParts p = green_parts(u, d, points_for(d, points_per_axis));
    const double g = 1.0 + p.m1;
    // -phi'/phi with phi = m1/g, phi' = g'/g^2
    return -p.dgdu / (g * p.m1);
}

RateResult rate_function(double eps, int d, int points_per_axis) {
    require(eps > 0.0 && eps < 0.5, Errc::precondition,
            "rate function: eps must lie in (0, 1/2); the tail is void at eps >= 1/2");
    const int m = points_for(d, points_per_axis);
    const double target = 1.0 / eps;  // tilted mean excursion length to hit

    RateResult out;
    if (tilt_mean(kUFloor, d, m) <= target) {
        // target unreachable above the floor (transient walk / tiny eps)
        out.u_star = kUFloor;
        out.extrapolated = true;
        out.value = eps * r_of(kUFloor, d, m);
        return out;
    }
    double lo = kUFloor, hi = 1.0;
    while (tilt_mean(hi, d, m) > target) {
        hi *= 2.0;
        require(hi < 1e6, Errc::numeric, "rate function: tilt bracket failed to close");
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tilt_mean(mid, d, m) > target)
            lo = mid;
        else
            hi = mid;
    }
    out.u_star = 0.5 * (lo + hi);
    out.value = eps * r_of(out.u_star, d, m);
    return out;
}

Estimate mc_tail(int d, std::int64_t n, double eps, std::int64_t samples, std::uint64_t seed) {
    require(d >= 1 && n >= 1 && samples >= 1, Errc::precondition, "mc tail: bad arguments");
    require(eps > 0.0, Errc::precondition, "mc tail: eps must be positive");
    const double thresh = eps * static_cast<double>(n);
    Rng rng(seed);
    std::int64_t hits = 0;
    if (d == 1) {
        // one 64-bit draw feeds 64 steps
        for (std::int64_t s = 0; s < samples; ++s) {
            std::int64_t pos = 0, visits = 1;
            std::int64_t left = n - 1;
            while (left > 0) {
                std::uint64_t w = rng.bits();
                const int take = static_cast<int>(left < 64 ? left : 64);
                for (int b = 0; b < take; ++b) {
                    pos += (w & 1) ? 1 : -1;
                    w >>= 1;
                    if (pos == 0) ++visits;
                }
                left -= take;
            }
            if (static_cast<double>(visits) > thresh) ++hits;
        }
    } else {
        std::vector<std::int32_t> pos(static_cast<std::size_t>(d));
        for (std::int64_t s = 0; s < samples; ++s) {
            std::fill(pos.begin(), pos.end(), 0);
            std::int64_t visits = 1;
            int nonzero = 0;
            for (std::int64_t i = 1; i < n; ++i) {
                const auto code = static_cast<int>(rng.below(static_cast<std::uint32_t>(2 * d)));
                const int axis = code >> 1;
                auto& x = pos[static_cast<std::size_t>(axis)];
                const std::int32_t before = x;
                x += (code & 1) ? -1 : 1;
                nonzero += (x != 0) - (before != 0);
                if (nonzero == 0) ++visits;
            }
            if (static_cast<double>(visits) > thresh) ++hits;
        }
    }
    return bernoulli_estimate(hits, samples);
}

double pulled_rate_bound(const std::vector<double>& lambda, double alpha, int d) {
    require(d >= 1, Errc::precondition, "pulled rate bound: d must be >= 1");
    require(lambda.empty() || static_cast<int>(lambda.size()) == d, Errc::precondition,
            "pulled rate bound: lambda must have d components");
    require(alpha >= 0.0, Errc::precondition, "pulled rate bound: alpha must be >= 0");
    double m = 0.0;
    for (int k = 0; k < d; ++k) m += std::cosh(lambda.empty() ? 0.0 : lambda[static_cast<std::size_t>(k)]);
    return alpha * std::log(m / d);
}

}  // namespace polyq
