#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "polyq/charge_law.hpp"
#include "polyq/errors.hpp"
#include "polyq/exact.hpp"
#include "polyq/field.hpp"
#include "polyq/gibbs.hpp"
#include "polyq/pulling.hpp"
#include "polyq/reference.hpp"
#include "polyq/util.hpp"

using namespace polyq;

namespace {

GibbsSpec make_spec(int d, std::int64_t n, double beta, const ChargeLaw& law, std::uint64_t seed) {
    GibbsSpec s;
    s.d = d;
    s.n = n;
    s.beta = beta;
    s.law = law;
    s.seed = seed;
    return s;
}

}  // namespace

TEST_CASE("path counting and iteration") {
    CHECK(total_paths(1, 1) == 1);
    CHECK(total_paths(2, 5) == 256);
    CHECK(total_paths(3, 4) == 216);
    CHECK_THROWS_AS(total_paths(2, 40), Error);  // exceeds 64 bits

    PathIterator it(1, 3);
    CHECK(it.count() == 4);
    std::vector<std::vector<std::int32_t>> all;
    Walk w(1, {});
    while (it.next(w)) all.push_back(w.positions());
    CHECK(all.size() == 4);

    // disjoint shards reproduce the full enumeration
    PathIterator shard(1, 3);
    shard.seek(2);
    std::vector<std::vector<std::int32_t>> tail;
    while (shard.next(w)) tail.push_back(w.positions());
    CHECK(tail.size() == 2);
    CHECK(tail[0] == all[2]);
    CHECK(tail[1] == all[3]);
    CHECK_THROWS_AS(shard.seek(5), Error);
}

TEST_CASE("incremental partition agrees with the scalar oracle") {
    for (int d : {1, 2}) {
        for (std::int64_t n : {5, 7}) {
            for (double beta : {0.7, -0.9}) {
                for (const ChargeLaw& law : {ChargeLaw::rademacher(), ChargeLaw::gaussian()}) {
                    const GibbsSpec s = make_spec(d, n, beta, law, 17 + static_cast<std::uint64_t>(n));
                    const ChargeVector q = s.draw_charges();
                    const double fast = quenched_partition(s, q).log_z;
                    const double slow = reference_log_partition(s, q);
                    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
                }
            }
        }
    }
    const GibbsSpec s3 = make_spec(3, 5, 1.2, ChargeLaw::uniform_symmetric(), 5);
    const ChargeVector q3 = s3.draw_charges();
    CHECK(quenched_partition(s3, q3).log_z ==
          doctest::Approx(reference_log_partition(s3, q3)).epsilon(1e-12));
}

TEST_CASE("interaction-form weights give the same measure at half the coupling") {
    const GibbsSpec s = make_spec(2, 7, 1.1, ChargeLaw::rademacher(), 23);
    const ChargeVector q = s.draw_charges();
    GibbsSpec doubled = s;
    doubled.beta = 2.0 * s.beta;
    const PathObservable obs = [](const PathView& v) {
        return v.h / (static_cast<double>(v.n) * static_cast<double>(v.n));
    };
    CHECK(gibbs_expectation(s, q, obs) ==
          doctest::Approx(reference_expectation_interaction(doubled, q, obs)).epsilon(1e-11));
}

TEST_CASE("shifted weights keep log Z finite at glassy couplings") {
    const GibbsSpec s = make_spec(2, 8, 5000.0, ChargeLaw::rademacher(), 31);
    const ChargeVector q = s.draw_charges();
    const PartitionResult z = quenched_partition(s, q);
    CHECK(z.shifted);
    CHECK(std::isfinite(z.log_z));
    const MaxEnergyResult mx = brute_max_energy(q, 2);
    CHECK(z.max_h == mx.max_h);
    const double floor_lz = s.beta * mx.max_h / 8.0 - 7.0 * std::log(4.0);
    CHECK(z.log_z >= floor_lz - 1e-9);
    CHECK(z.log_z <= floor_lz + std::log(16384.0) + 1e-9);
}

TEST_CASE("truncation at full level reproduces the partition function") {
    const GibbsSpec s = make_spec(2, 8, 1.4, ChargeLaw::rademacher(), 3);
    const ChargeVector q = s.draw_charges();
    const double full = quenched_partition(s, q).log_z;
    CHECK(truncated_partition(s, q, 1.0).log_z == doctest::Approx(full).epsilon(1e-14));
    // L* <= ceil(N/2) always holds for a nearest-neighbour path, so eps=0.51
    // already keeps every path at N=8
    CHECK(truncated_partition(s, q, 0.51).log_z == doctest::Approx(full).epsilon(1e-14));
}

TEST_CASE("truncated partition grows with the truncation level") {
    const GibbsSpec s = make_spec(2, 8, 2.0, ChargeLaw::gaussian(), 12);
    const ChargeVector q = s.draw_charges();
    const double z25 = truncated_partition(s, q, 0.25).log_z;
    const double z38 = truncated_partition(s, q, 0.38).log_z;
    const double z50 = truncated_partition(s, q, 0.51).log_z;
    CHECK(z25 <= z38 + 1e-13);
    CHECK(z38 <= z50 + 1e-13);
    CHECK_THROWS_AS(truncated_partition(s, q, 0.1), Error);  // floor(0.8) = 0 levels
}

TEST_CASE("expectations at infinite temperature are plain path averages") {
    const GibbsSpec s = make_spec(2, 6, 0.0, ChargeLaw::gaussian(), 44);
    const ChargeVector q = s.draw_charges();
    PathIterator it(2, 6);
    Walk w(2, {});
    Kahan sum;
    while (it.next(w)) sum.add(energy(q, w));
    const double want = sum.get() / static_cast<double>(it.count()) / 36.0;
    const PathObservable obs = [](const PathView& v) {
        return v.h / (static_cast<double>(v.n) * static_cast<double>(v.n));
    };
    CHECK(gibbs_expectation(s, q, obs) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("a single enumeration evaluates many observables consistently") {
    const GibbsSpec s = make_spec(2, 7, 1.7, ChargeLaw::rademacher(), 8);
    const ChargeVector q = s.draw_charges();
    const PathObservable a = [](const PathView& v) { return v.h; };
    const PathObservable b = [](const PathView& v) { return static_cast<double>(v.lstar); };
    const PathObservable c = [](const PathView& v) { return static_cast<double>(v.diameter()); };
    const std::vector<double> joint = gibbs_expectations(s, q, {a, b, c});
    REQUIRE(joint.size() == 3);
    CHECK(joint[0] == doctest::Approx(gibbs_expectation(s, q, a)).epsilon(1e-13));
    CHECK(joint[1] == doctest::Approx(gibbs_expectation(s, q, b)).epsilon(1e-13));
    CHECK(joint[2] == doctest::Approx(gibbs_expectation(s, q, c)).epsilon(1e-13));
}

TEST_CASE("distance to the uniform law vanishes at beta zero and grows with beta") {
    const GibbsSpec s0 = make_spec(2, 6, 0.0, ChargeLaw::rademacher(), 2);
    const ChargeVector q = s0.draw_charges();
    CHECK(tv_distance(s0, q) == doctest::Approx(0.0).epsilon(1e-13));
    GibbsSpec s1 = s0, s2 = s0;
    s1.beta = 0.5;
    s2.beta = 2.0;
    const double t1 = tv_distance(s1, q);
    const double t2 = tv_distance(s2, q);
    CHECK(t1 > 0.0);
    CHECK(t1 < t2);
    CHECK(t2 <= 1.0);
}

TEST_CASE("annealed average matches the two-path closed form at N=2") {
    // both length-2 paths have one doubly-occupied pair of sites with L=1, so
    // E Z_2 = (1 - beta)^{-1}
    const AnnealedResult a = annealed_partition_gaussian(1, 2, 0.3);
    CHECK(!a.infinite);
    CHECK(a.value == doctest::Approx(1.0 / 0.7).epsilon(1e-12));
    CHECK(!annealed_partition_gaussian(1, 2, 0.999).infinite);
    CHECK(annealed_partition_gaussian(1, 2, 1.0).infinite);
    const AnnealedResult d3 = annealed_partition_gaussian(3, 4, 0.5);
    CHECK(!d3.infinite);
    CHECK(d3.value > 1.0);
    CHECK(std::isfinite(d3.value));
}

TEST_CASE("brute-force maximum is attained by its reported walk") {
    const ChargeVector q = sample_charges(ChargeLaw::gaussian(), 8, 19);
    const MaxEnergyResult res = brute_max_energy(q, 2);
    CHECK(energy(q, res.argmax) == doctest::Approx(res.max_h).epsilon(1e-13));
    CHECK(res.argmax_count >= 1);
    PathIterator it(2, 8);
    Walk w(2, {});
    double best = -1.0;
    while (it.next(w)) best = std::max(best, energy(q, w));
    CHECK(res.max_h == doctest::Approx(best).epsilon(1e-13));
}

TEST_CASE("endpoint law reduces to the binomial profile on the line") {
    const GibbsSpec s = make_spec(1, 6, 0.0, ChargeLaw::rademacher(), 1);
    const ChargeVector q = s.draw_charges();
    const auto law = endpoint_law(s, q);
    const auto want = endpoint_binomial_d1(6);
    REQUIRE(law.size() == want.size());
    double total = 0.0;
    for (std::size_t i = 0; i < law.size(); ++i) {
        REQUIRE(law[i].first.size() == 1);
        CHECK(law[i].first[0] == want[i].first);
        CHECK(law[i].second == doctest::Approx(want[i].second).epsilon(1e-12));
        total += law[i].second;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tilted partition at zero pull is bit-identical to the quenched one") {
    GibbsSpec s = make_spec(2, 7, 1.3, ChargeLaw::rademacher(), 29);
    const ChargeVector q = s.draw_charges();
    const double plain = quenched_partition(s, q).log_z;
    s.pull = {0.0, 0.0};
    CHECK(tilted_partition(s, q).log_z == plain);
    s.pull.clear();
    CHECK(tilted_partition(s, q).log_z == plain);
}

TEST_CASE("tilted partition matches a direct step-probability sum") {
    GibbsSpec s = make_spec(1, 6, 0.9, ChargeLaw::rademacher(), 10);
    s.pull = {0.8};
    const ChargeVector q = s.draw_charges();
    const std::vector<double> p = tilted_step_law(s.pull, 1);
    PathIterator it(1, 6);
    Walk w(1, {});
    Kahan z;
    while (it.next(w)) {
        double weight = std::exp(s.beta * energy(q, w) / 6.0);
        for (const Step& st : w.steps()) weight *= p[static_cast<std::size_t>(step_code(st))];
        z.add(weight);
    }
    CHECK(tilted_partition(s, q).log_z == doctest::Approx(std::log(z.get())).epsilon(1e-12));
}

TEST_CASE("the tilted walk measure is normalized at beta zero") {
    GibbsSpec s = make_spec(2, 8, 0.0, ChargeLaw::gaussian(), 7);
    s.pull = {0.6, -1.1};
    const ChargeVector q = s.draw_charges();
    CHECK(tilted_partition(s, q).log_z == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("references refuse pulled specs and budgets bind") {
    GibbsSpec s = make_spec(2, 8, 1.0, ChargeLaw::rademacher(), 4);
    const ChargeVector q = s.draw_charges();
    CHECK_THROWS_AS(quenched_partition(s, q, EnumLimits{100, 0}), Error);
    s.pull = {0.5, 0.0};
    CHECK_THROWS_AS(reference_log_partition(s, q), Error);
}

TEST_CASE("bundled exact ensemble draws its own charges") {
    const GibbsSpec s = make_spec(2, 6, 0.8, ChargeLaw::rademacher(), 99);
    const ExactGibbs g = ExactGibbs::compute(s);
    CHECK(g.q.size() == 6);
    CHECK(g.z.log_z == doctest::Approx(quenched_partition(s, g.q).log_z).epsilon(1e-15));
    const PathObservable one = [](const PathView&) { return 1.0; };
    CHECK(g.expectation(one) == doctest::Approx(1.0).epsilon(1e-13));
}
