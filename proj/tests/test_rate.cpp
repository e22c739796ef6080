#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "polyq/errors.hpp"
#include "polyq/rate.hpp"
#include "polyq/reference.hpp"

using namespace polyq;

namespace {

// d=1 closed forms: g(u) = (1 - e^{-2u})^{-1/2}, phi(u) = 1 - 1/g(u)
double green_closed_d1(double u) { return 1.0 / std::sqrt(1.0 - std::exp(-2.0 * u)); }

}  // namespace

TEST_CASE("lattice green function matches the closed form on the line") {
    for (double u : {0.1, 0.3, 0.7, 1.5, 4.0}) {
        CHECK(green_function(u, 1) == doctest::Approx(green_closed_d1(u)).epsilon(1e-12));
        CHECK(green_series(u, 1, 4000) == doctest::Approx(green_closed_d1(u)).epsilon(1e-9));
        CHECK(green_function_error(u, 1) < 1e-10);
    }
}

TEST_CASE("planar green function agrees with the return-probability series") {
    for (double u : {0.2, 0.5, 1.0, 2.5}) {
        CHECK(green_function(u, 2) == doctest::Approx(green_series(u, 2, 2000)).epsilon(1e-9));
    }
}

TEST_CASE("renewal identity ties the green function to the first-return transform") {
    for (int d : {1, 2, 3}) {
        for (double u : {0.05, 0.2, 0.8, 2.0, 5.0}) {
            const double g = green_function(u, d);
            const double phi = first_return_mgf(u, d);
            CHECK(g * (1.0 - phi) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(phi > 0.0);
            CHECK(phi < 1.0);
        }
    }
}

TEST_CASE("first-return transform matches its closed form and its series") {
    for (double u : {0.1, 0.4, 1.0, 3.0}) {
        CHECK(first_return_mgf(u, 1) == doctest::Approx(first_return_closed_d1(u)).epsilon(1e-12));
        CHECK(first_return_mgf(u, 2) == doctest::Approx(first_return_series(u, 2, 2000)).epsilon(1e-9));
    }
}

TEST_CASE("differentiated quadrature equals a central difference") {
    const double h = 1e-5;
    for (int d : {1, 2}) {
        for (double u : {0.3, 0.9, 2.0}) {
            const double want = (first_return_mgf(u + h, d) - first_return_mgf(u - h, d)) / (2.0 * h);
            CHECK(first_return_mgf_deriv(u, d) == doctest::Approx(want).epsilon(1e-6));
        }
    }
}

TEST_CASE("tilted excursion mean has its d=1 closed form and its limits") {
    for (double u : {0.2, 0.6, 1.4}) {
        const double w = std::sqrt(1.0 - std::exp(-2.0 * u));
        CHECK(tilt_mean(u, 1) == doctest::Approx((1.0 + w) / w).epsilon(1e-10));
    }
    // decreasing toward the two-step floor
    CHECK(tilt_mean(0.05, 2) > tilt_mean(0.5, 2));
    CHECK(tilt_mean(0.5, 2) > tilt_mean(5.0, 2));
    CHECK(tilt_mean(8.0, 2) > 2.0);
    CHECK(tilt_mean(8.0, 2) < 2.01);
}

TEST_CASE("the rate solves its own tilt equation") {
    for (int d : {1, 2}) {
        for (double eps : {0.1, 0.2, 0.3, 0.45}) {
            const RateResult r = rate_function(eps, d);
            REQUIRE(!r.extrapolated);
            CHECK(tilt_mean(r.u_star, d) == doctest::Approx(1.0 / eps).epsilon(1e-8));
            // value recomputed from the reported tilt point
            const double phi = first_return_mgf(r.u_star, d);
            const double want = eps * (-std::log(phi) - r.u_star / eps);
            CHECK(r.value == doctest::Approx(want).epsilon(1e-10));
            CHECK(r.value > 0.0);
        }
    }
    CHECK_THROWS_AS(rate_function(0.5, 1), Error);
    CHECK_THROWS_AS(rate_function(0.0, 1), Error);
}

TEST_CASE("the rate is increasing and convex in the excursion density") {
    std::vector<double> val;
    for (double eps : {0.1, 0.2, 0.3, 0.4}) val.push_back(rate_function(eps, 1).value);
    for (std::size_t k = 1; k < val.size(); ++k) CHECK(val[k] > val[k - 1]);
    CHECK(val[2] - val[1] > val[1] - val[0]);  // convexity on the equi-spaced grid
    CHECK(val[3] - val[2] > val[2] - val[1]);
}

TEST_CASE("envelope derivative of the rate equals the tilt integrand") {
    const double eps = 0.25, h = 1e-4;
    const RateResult r = rate_function(eps, 1);
    const double fd = (rate_function(eps + h, 1).value - rate_function(eps - h, 1).value) / (2.0 * h);
    const double phi = first_return_mgf(r.u_star, 1);
    const double envelope = -std::log(phi);  // d/deps [eps R(u*)] at fixed u*
    CHECK(fd == doctest::Approx(envelope).epsilon(1e-6));
}

TEST_CASE("exact excursion tail on the line: hand values and monotonicity") {
    CHECK(excursion_tail_exact_d1(3, 0) == doctest::Approx(1.0));
    CHECK(excursion_tail_exact_d1(3, 1) == doctest::Approx(0.5).epsilon(1e-14));
    // P{tau_1 <= 4} = P{return by step 2} + P{first return at step 4} = 1/2 + 1/8
    CHECK(excursion_tail_exact_d1(5, 1) == doctest::Approx(0.625).epsilon(1e-14));
    CHECK(excursion_tail_exact_d1(41, 2) > excursion_tail_exact_d1(41, 3));
    CHECK(excursion_tail_exact_d1(41, 3) < excursion_tail_exact_d1(61, 3));
}

TEST_CASE("monte carlo tail matches the exact convolution") {
    const std::int64_t n = 30;
    const double eps = 0.2;  // threshold eps*n = 6 visits
    const Estimate mc = mc_tail(1, n, eps, 200000, 77);
    const double exact = excursion_tail_exact_d1(n, 6);
    INFO("mc ", mc.mean, " +- ", mc.se, " exact ", exact);
    CHECK(std::abs(mc.mean - exact) < 4.0 * mc.se);
    CHECK(mc.se < 0.005);
    // reproducible and seed-sensitive
    CHECK(mc_tail(1, n, eps, 200000, 77).mean == mc.mean);
    CHECK(mc_tail(1, n, eps, 200000, 78).mean != mc.mean);
    const Estimate planar = mc_tail(2, 40, 0.1, 20000, 5);
    CHECK(planar.mean > 0.0);
    CHECK(planar.mean < 1.0);
}

TEST_CASE("monte carlo first-return transform matches the closed form") {
    const double u = 0.5;
    const Estimate mc = mc_first_return_mgf(u, 1, 200000, 11);
    const double exact = first_return_closed_d1(u);
    INFO("mc ", mc.mean, " +- ", mc.se, " exact ", exact);
    CHECK(std::abs(mc.mean - exact) < 4.0 * mc.se + 1e-4);
}

TEST_CASE("pulled walk rate bound") {
    CHECK(pulled_rate_bound({0.0, 0.0}, 0.3, 2) == 0.0);
    const double lam = std::log(3.0);
    CHECK(pulled_rate_bound({lam}, 0.25, 1) == doctest::Approx(0.25 * std::log(5.0 / 3.0)).epsilon(1e-12));
    // monotone in |lambda|
    CHECK(pulled_rate_bound({1.0, 0.0}, 0.3, 2) > pulled_rate_bound({0.5, 0.0}, 0.3, 2));
}

TEST_CASE("quadrature defaults are sane") {
    CHECK(default_quadrature_points(1) >= 1024);
    CHECK(default_quadrature_points(2) >= 256);
    CHECK(default_quadrature_points(3) >= 64);
    CHECK(default_quadrature_points(4) >= 32);
}
