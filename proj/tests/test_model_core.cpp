#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <set>
#include <unordered_map>
#include <vector>

#include "polyq/charge_law.hpp"
#include "polyq/errors.hpp"
#include "polyq/field.hpp"
#include "polyq/gibbs.hpp"
#include "polyq/rng.hpp"
#include "polyq/util.hpp"
#include "polyq/walk.hpp"

using namespace polyq;

namespace {

// numeric E exp(-c|q|) for the standard normal by midpoint rule on [-10, 10]
double gauss_exp_neg_abs(double c) {
    const int m = 40000;
    const double a = -10.0, b = 10.0, h = (b - a) / m;
    Kahan s;
    for (int i = 0; i < m; ++i) {
        const double x = a + (i + 0.5) * h;
        s.add(std::exp(-c * std::abs(x)) * std::exp(-0.5 * x * x));
    }
    return s.get() * h / std::sqrt(2.0 * 3.14159265358979323846);
}

double field_energy_by_hand(const ChargeVector& q, const Walk& w) {
    std::unordered_map<std::uint64_t, double> charge;
    const std::vector<std::int32_t> pos = w.positions();
    const int d = w.dim();
    for (std::int64_t i = 0; i < w.monomers(); ++i) charge[pack_site(&pos[i * d], d)] += q.q[i];
    double h = 0.0;
    for (const auto& [key, v] : charge) h += v * v;
    return h;
}

}  // namespace

TEST_CASE("seed derivation is deterministic and stream-separated") {
    CHECK(derive_seed(42, 0) == derive_seed(42, 0));
    CHECK(derive_seed(42, 0) != derive_seed(42, 1));
    CHECK(derive_seed(42, 0) != derive_seed(43, 0));
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 64; ++s) seen.insert(derive_seed(7, s));
    CHECK(seen.size() == 64);
}

TEST_CASE("rng samplers respect their ranges and are reproducible") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.bits() == b.bits());
    }
    Rng r(5);
    bool saw_true = false, saw_false = false;
    for (int i = 0; i < 2000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(r.below(7) < 7);
        if (r.coin())
            saw_true = true;
        else
            saw_false = true;
    }
    CHECK(saw_true);
    CHECK(saw_false);
}

TEST_CASE("rademacher law: exact moments") {
    const ChargeLaw law = ChargeLaw::rademacher();
    CHECK(law.integer_valued());
    CHECK(law.mgf(0.7) == doctest::Approx(std::cosh(0.7)).epsilon(1e-15));
    CHECK(law.mean_signed_part(+1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(law.mean_signed_part(-1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(law.exp_neg_abs(1.3) == doctest::Approx(std::exp(-1.3)).epsilon(1e-15));
    CHECK(law.tail(+1, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(law.tail(+1, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("gaussian law: moments against quadrature") {
    const ChargeLaw law = ChargeLaw::gaussian();
    CHECK(!law.integer_valued());
    CHECK(law.mgf(0.9) == doctest::Approx(std::exp(0.5 * 0.81)).epsilon(1e-12));
    CHECK(law.mean_signed_part(+1) ==
          doctest::Approx(1.0 / std::sqrt(2.0 * 3.14159265358979323846)).epsilon(1e-12));
    for (double c : {0.25, 1.0, 3.0})
        CHECK(law.exp_neg_abs(c) == doctest::Approx(gauss_exp_neg_abs(c)).epsilon(1e-7));
    // P{q > z} halves the two-sided tail
    CHECK(law.tail(+1, 1.0) == doctest::Approx(0.5 * std::erfc(1.0 / std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("uniform law: unit variance on [-sqrt3, sqrt3]") {
    const ChargeLaw law = ChargeLaw::uniform_symmetric();
    const double r = std::sqrt(3.0);
    CHECK(law.mgf(0.8) == doctest::Approx(std::sinh(0.8 * r) / (0.8 * r)).epsilon(1e-12));
    CHECK(law.mean_signed_part(+1) == doctest::Approx(r / 4.0).epsilon(1e-12));
    Rng rng(9);
    for (int i = 0; i < 500; ++i) {
        const double v = law.sample(rng);
        CHECK(std::abs(v) <= r + 1e-12);
    }
}

TEST_CASE("discrete laws standardize to mean zero variance one") {
    const ChargeLaw law = ChargeLaw::discrete({0.0, 1.0}, {0.5, 0.5});
    // affine standardization of a fair {0,1} coin is exactly rademacher
    for (double t : {-1.5, -0.2, 0.3, 2.0})
        CHECK(law.mgf(t) == doctest::Approx(std::cosh(t)).epsilon(1e-12));
    CHECK(law.integer_valued());
    CHECK_THROWS_AS(ChargeLaw::discrete({2.0, 2.0}, {0.5, 0.5}), Error);  // zero variance
    CHECK_THROWS_AS(ChargeLaw::discrete({0.0, 1.0}, {-0.1, 1.1}), Error);  // negative weight
    // weights are normalized, so scaling them changes nothing
    const ChargeLaw scaled = ChargeLaw::discrete({0.0, 1.0}, {3.0, 3.0});
    CHECK(scaled.mgf(0.7) == doctest::Approx(std::cosh(0.7)).epsilon(1e-12));
}

TEST_CASE("charge law parsing") {
    CHECK(ChargeLaw::parse("rademacher").kind() == LawKind::rademacher);
    CHECK(ChargeLaw::parse("gaussian").kind() == LawKind::gaussian);
    CHECK(ChargeLaw::parse("uniform").kind() == LawKind::uniform_symmetric);
    const ChargeLaw d = ChargeLaw::parse("discrete:-1:0.5,1:0.5");
    CHECK(d.kind() == LawKind::discrete);
    CHECK(d.mgf(0.4) == doctest::Approx(std::cosh(0.4)).epsilon(1e-12));
    CHECK_THROWS_AS(ChargeLaw::parse("cauchy"), Error);
    CHECK_THROWS_AS(ChargeLaw::parse("discrete:1:1.5"), Error);
}

TEST_CASE("sampled charges are reproducible with exact unit empirical scale") {
    const ChargeVector a = sample_charges(ChargeLaw::rademacher(), 1000, 11);
    const ChargeVector b = sample_charges(ChargeLaw::rademacher(), 1000, 11);
    CHECK(a.q == b.q);
    CHECK(a.integer_valued);
    for (double v : a.q) CHECK(std::abs(v) == 1.0);
    const ChargeVector g = sample_charges(ChargeLaw::gaussian(), 20000, 3);
    CHECK(!g.integer_valued);
    double mean = 0.0, var = 0.0;
    for (double v : g.q) mean += v;
    mean /= static_cast<double>(g.q.size());
    for (double v : g.q) var += (v - mean) * (v - mean);
    var /= static_cast<double>(g.q.size());
    CHECK(std::abs(mean) < 0.05);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("folding constants of the rademacher law") {
    const ChargeMoments m = charge_moments(ChargeLaw::rademacher());
    CHECK(m.kappa == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(!m.kappa_from_grid);
    CHECK(m.gamma == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(m.lambda == doctest::Approx(0.125).epsilon(1e-12));
    // half-concentration threshold in d=2 and the compactness density
    CHECK(m.beta_alpha(0.5, 2) == doctest::Approx(64.0 * std::log(4.0)).epsilon(1e-12));
    const double beta = 34.0 * std::log(4.0) + 1.0;
    CHECK(m.rho(beta, 1.0 / 17.0, 2) == doctest::Approx(std::exp(-1.0 / 34.0)).epsilon(1e-12));
}

TEST_CASE("gaussian folding constants use the grid-estimated kappa honestly") {
    const ChargeMoments m = charge_moments(ChargeLaw::gaussian());
    CHECK(m.kappa == doctest::Approx(1.0).epsilon(1e-6));  // exact subgaussian constant is 1
    CHECK(m.gamma == doctest::Approx(1.0 / (2.0 * 3.14159265358979323846)).epsilon(1e-9));
    CHECK(m.lambda > 0.0);
    CHECK(m.beta_alpha(0.5, 2) >= 16.0 * std::log(4.0));
}

TEST_CASE("walk constructors and validation") {
    const Walk s = Walk::straight(2, 5);
    CHECK(s.monomers() == 5);
    const std::vector<std::int32_t> pos = s.positions();
    for (std::int64_t i = 0; i < 5; ++i) {
        CHECK(pos[2 * i] == static_cast<std::int32_t>(i));
        CHECK(pos[2 * i + 1] == 0);
    }
    CHECK_NOTHROW(Walk::from_positions(2, pos));
    std::vector<std::int32_t> bad = pos;
    bad[8] = 9;  // tears the last step
    CHECK_THROWS_AS(Walk::from_positions(2, bad), Error);
    CHECK_THROWS_AS(Walk::from_positions(2, {0, 0, 1, 1}), Error);  // diagonal step

    Rng rng(4);
    const Walk u1 = Walk::uniform(3, 50, rng);
    Rng rng2(4);
    const Walk u2 = Walk::uniform(3, 50, rng2);
    CHECK(u1.positions() == u2.positions());
    CHECK(u1.monomers() == 50);
}

TEST_CASE("l1 diameter matches the definition on hand cases") {
    CHECK(diameter_l1(Walk::straight(1, 7)) == 6);
    CHECK(diameter_l1(Walk::straight(3, 1)) == 0);
    // L-shaped walk: (0,0),(1,0),(1,1) has diameter |(1,1)| = 2
    const Walk l = Walk::from_positions(2, {0, 0, 1, 0, 1, 1});
    CHECK(diameter_l1(l) == 2);
    // brute force check on random walks
    Rng rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        const Walk w = Walk::uniform(2, 12, rng);
        const std::vector<std::int32_t> pos = w.positions();
        std::int64_t want = 0;
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 12; ++j)
                want = std::max<std::int64_t>(want, std::abs(pos[2 * i] - pos[2 * j]) +
                                                        std::abs(pos[2 * i + 1] - pos[2 * j + 1]));
        CHECK(diameter_l1(w) == want);
    }
}

TEST_CASE("occupation field sums local charges and local times") {
    Rng rng(21);
    const ChargeVector q = sample_charges(ChargeLaw::rademacher(), 30, 5);
    const Walk w = Walk::uniform(2, 30, rng);
    const OccupationField f = OccupationField::build(q, w);
    CHECK(f.total_visits() == 30);
    CHECK(f.energy() == doctest::Approx(field_energy_by_hand(q, w)).epsilon(1e-12));
    CHECK(energy(q, w) == doctest::Approx(f.energy()).epsilon(1e-12));
    std::int64_t lmax = 0;
    for (const auto& [key, st] : f.sites()) lmax = std::max<std::int64_t>(lmax, st.visits);
    CHECK(f.max_local_time() == lmax);
}

TEST_CASE("energy equals twice the interaction sum plus the charge norm") {
    Rng rng(33);
    for (const ChargeLaw& law : {ChargeLaw::rademacher(), ChargeLaw::gaussian()}) {
        for (int rep = 0; rep < 10; ++rep) {
            const std::int64_t n = 5 + rep * 3;
            const ChargeVector q = sample_charges(law, n, 100 + static_cast<std::uint64_t>(rep));
            const Walk w = Walk::uniform(law.integer_valued() ? 2 : 3, n, rng);
            double qq = 0.0;
            for (double v : q.q) qq += v * v;
            const double lhs = energy(q, w);
            const double rhs = 2.0 * interaction_energy(q, w) + qq;
            if (law.integer_valued())
                CHECK(lhs == rhs);
            else
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
        }
    }
}

TEST_CASE("energy is bounded by the max local time times the charge norm") {
    Rng rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        const std::int64_t n = 4 + (rep % 40);
        const ChargeVector q = sample_charges(ChargeLaw::gaussian(), n, 7 + static_cast<std::uint64_t>(rep));
        const Walk w = Walk::uniform(1 + rep % 3, n, rng);
        const OccupationField f = OccupationField::build(q, w);
        double qq = 0.0;
        for (double v : q.q) qq += v * v;
        CHECK(f.energy() <= static_cast<double>(f.max_local_time()) * qq * (1.0 + 1e-12) + 1e-12);
    }
}

TEST_CASE("site packing round-trips signed coordinates") {
    const std::int32_t x[4] = {-5, 1999, 0, -32000};
    const std::uint64_t key = pack_site(x, 4);
    std::int32_t back[4];
    unpack_site(key, 4, back);
    for (int k = 0; k < 4; ++k) CHECK(back[k] == x[k]);
}

TEST_CASE("parity sign sums on a hand vector") {
    ChargeVector q;
    q.q = {1.0, -2.0, 3.0, 4.0, -5.0};
    const ParitySignSums s = parity_sign_sums(q);
    CHECK(s.at(0, +1) == doctest::Approx(4.0).epsilon(1e-15));   // monomers 0,2 positive parts: 1+3
    CHECK(s.at(0, -1) == doctest::Approx(5.0).epsilon(1e-15));   // monomer 4 negative part
    CHECK(s.at(1, +1) == doctest::Approx(4.0).epsilon(1e-15));   // monomer 3
    CHECK(s.at(1, -1) == doctest::Approx(2.0).epsilon(1e-15));   // monomer 1
    CHECK(s.sum_all() == doctest::Approx(15.0).epsilon(1e-15));
}

TEST_CASE("qbar is the worst window mean of |q|") {
    ChargeVector q;
    q.q = {1.0, 1.0, 0.0, 0.0, 1.0, 1.0};
    // windows of length >= 2: the (0,0) pair gives mean 0
    CHECK(qbar(q, 2) == doctest::Approx(0.0));
    // length >= 4 windows: best adversary is 1,0,0,1 -> 1/2
    CHECK(qbar(q, 4) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(qbar(q, 5) == doctest::Approx(3.0 / 5.0).epsilon(1e-15));
    CHECK_THROWS_AS(qbar(q, 6), Error);
}

TEST_CASE("gibbs spec validation") {
    GibbsSpec s;
    CHECK_NOTHROW(s.validate());
    s.d = 0;
    CHECK_THROWS_AS(s.validate(), Error);
    s.d = 2;
    s.pull = {0.1};
    CHECK_THROWS_AS(s.validate(), Error);
    s.pull = {0.1, 0.0};
    CHECK_NOTHROW(s.validate());
    CHECK(s.pulled());
    s.pull = {0.0, 0.0};
    CHECK(!s.pulled());
    CHECK(s.pull_at(1) == 0.0);
}
