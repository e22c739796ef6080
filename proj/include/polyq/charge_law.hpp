#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polyq/rng.hpp"

namespace polyq {

enum class LawKind { rademacher, gaussian, uniform_symmetric, discrete };

// Centered unit-variance charge distributions.  Discrete laws take arbitrary
// nonnegative weights (normalized at construction) and are affinely
// standardized to mean 0, variance 1; zero-variance input is rejected.
class ChargeLaw {
public:
    static ChargeLaw rademacher();
    static ChargeLaw gaussian();
    static ChargeLaw uniform_symmetric();  // uniform on [-sqrt3, sqrt3]
    static ChargeLaw discrete(std::vector<double> values, std::vector<double> probs);
    static ChargeLaw parse(const std::string& text);  // "rademacher" | "gaussian" | "uniform" | "discrete:v:p,v:p,..."

    LawKind kind() const { return kind_; }
    // true when every attainable charge value is an integer; energies are then
    // exact in double arithmetic
    bool integer_valued() const { return integer_valued_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& probs() const { return probs_; }
    std::string name() const;

    double sample(Rng& rng) const;
    double mgf(double t) const;               // E exp(t q)
    double mean_signed_part(int sign) const;  // E q^+ (sign=+1) or E q^- (sign=-1)
    double tail(int sign, double z) const;    // P{ q^sign > z }, z >= 0
    double exp_neg_abs(double c) const;       // E exp(-c |q|), c >= 0

private:
    ChargeLaw() = default;
    LawKind kind_ = LawKind::rademacher;
    bool integer_valued_ = true;
    std::vector<double> values_;  // discrete support (standardized)
    std::vector<double> probs_;
    std::vector<double> cum_;  // cumulative probs for sampling
};

struct ChargeVector {
    std::vector<double> q;
    bool integer_valued = false;
    std::int64_t size() const { return static_cast<std::int64_t>(q.size()); }
};

ChargeVector sample_charges(const ChargeLaw& law, std::int64_t n, std::uint64_t seed);

// Subgaussian and folding constants of a charge law.
//   kappa      = inf{ c : E exp(tq) <= exp(c t^2 / 2) for all t }
//   gamma      = min_eps (E q^eps)^2
//   lambda     = min_{eps,eps'} E[ min((E q^eps) q0^eps, (E q^eps') q1^eps') ],  q0 _|_ q1
struct ChargeMoments {
    ChargeLaw law = ChargeLaw::rademacher();
    double kappa = 1.0;
    bool kappa_from_grid = false;  // grid supremum rather than closed form
    double e_q_plus = 0.0;
    double e_q_minus = 0.0;
    double gamma = 0.0;
    double lambda = 0.0;

    // ln(2d) * max( 8 / ((1-alpha) gamma), 4 / lambda ),  0 < alpha < 1
    double beta_alpha(double alpha, int d) const;
    // 2d * E exp(-beta alpha sqrt(gamma) |q|)
    double rho(double beta, double alpha, int d) const;
};

ChargeMoments charge_moments(const ChargeLaw& law);

}  // namespace polyq
