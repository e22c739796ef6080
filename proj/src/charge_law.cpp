#include "polyq/charge_law.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "polyq/errors.hpp"

namespace polyq {

namespace {
constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2 pi)

bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }
}  // namespace

ChargeLaw ChargeLaw::rademacher() {
    ChargeLaw law;
    law.kind_ = LawKind::rademacher;
    law.integer_valued_ = true;
    law.values_ = {-1.0, 1.0};
    law.probs_ = {0.5, 0.5};
    law.cum_ = {0.5, 1.0};
    return law;
}

ChargeLaw ChargeLaw::gaussian() {
    ChargeLaw law;
    law.kind_ = LawKind::gaussian;
    law.integer_valued_ = false;
    return law;
}

ChargeLaw ChargeLaw::uniform_symmetric() {
    ChargeLaw law;
    law.kind_ = LawKind::uniform_symmetric;
    law.integer_valued_ = false;
    return law;
}

ChargeLaw ChargeLaw::discrete(std::vector<double> values, std::vector<double> probs) {
    require(values.size() == probs.size() && !values.empty(), Errc::config,
            "discrete law: values/probs size mismatch or empty");
    double psum = 0.0;
    for (double p : probs) {
        require(p >= 0.0, Errc::config, "discrete law: negative probability");
        psum += p;
    }
    require(psum > 0.0, Errc::config, "discrete law: zero total probability");
    for (double& p : probs) p /= psum;

    double mean = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) mean += probs[i] * values[i];
    double var = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double c = values[i] - mean;
        var += probs[i] * c * c;
    }
    require(var > 1e-12, Errc::config, "discrete law: zero variance, cannot standardize");
    double s = std::sqrt(var);
    for (double& v : values) v = (v - mean) / s;

    ChargeLaw law;
    law.kind_ = LawKind::discrete;
    law.values_ = std::move(values);
    law.probs_ = std::move(probs);
    law.cum_.resize(law.probs_.size());
    std::partial_sum(law.probs_.begin(), law.probs_.end(), law.cum_.begin());
    law.cum_.back() = 1.0;
    law.integer_valued_ =
        std::all_of(law.values_.begin(), law.values_.end(), [](double v) { return near_integer(v); });
    if (law.integer_valued_)
        for (double& v : law.values_) v = std::round(v);
    return law;
}

ChargeLaw ChargeLaw::parse(const std::string& text) {
    if (text == "rademacher") return rademacher();
    if (text == "gaussian") return gaussian();
    if (text == "uniform") return uniform_symmetric();
    const std::string prefix = "discrete:";
    if (text.rfind(prefix, 0) == 0) {
        std::vector<double> vals, probs;
        std::stringstream ss(text.substr(prefix.size()));
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto colon = item.find(':');
            require(colon != std::string::npos, Errc::config, "discrete law item needs value:prob, got " + item);
            vals.push_back(std::stod(item.substr(0, colon)));
            probs.push_back(std::stod(item.substr(colon + 1)));
        }
        return discrete(std::move(vals), std::move(probs));
    }
    fail(Errc::config, "unknown charge law: " + text);
}

std::string ChargeLaw::name() const {
    switch (kind_) {
        case LawKind::rademacher: return "rademacher";
        case LawKind::gaussian: return "gaussian";
        case LawKind::uniform_symmetric: return "uniform";
        case LawKind::discrete: {
            std::string s = "discrete:";
            char buf[64];
            for (std::size_t i = 0; i < values_.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%s%.12g:%.12g", i ? "," : "", values_[i], probs_[i]);
                s += buf;
            }
            return s;
        }
    }
    return "?";
}

double ChargeLaw::sample(Rng& rng) const {
    switch (kind_) {
        case LawKind::rademacher: return rng.coin() ? 1.0 : -1.0;
        case LawKind::gaussian: return rng.normal();
        case LawKind::uniform_symmetric: return kSqrt3 * (2.0 * rng.uniform() - 1.0);
        case LawKind::discrete: {
            double u = rng.uniform();
            auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
            std::size_t i = std::min<std::size_t>(it - cum_.begin(), values_.size() - 1);
            return values_[i];
        }
    }
    return 0.0;
}

double ChargeLaw::mgf(double t) const {
    switch (kind_) {
        case LawKind::rademacher: return std::cosh(t);
        case LawKind::gaussian: return std::exp(0.5 * t * t);
        case LawKind::uniform_symmetric: {
            double u = kSqrt3 * t;
            if (std::abs(u) < 1e-8) return 1.0 + u * u / 6.0;
            return std::sinh(u) / u;
        }
        case LawKind::discrete: {
            double s = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) s += probs_[i] * std::exp(t * values_[i]);
            return s;
        }
    }
    return 1.0;
}

double ChargeLaw::mean_signed_part(int sign) const {
    switch (kind_) {
        case LawKind::rademacher: return 0.5;
        case LawKind::gaussian: return kInvSqrt2Pi;
        case LawKind::uniform_symmetric: return kSqrt3 / 4.0;
        case LawKind::discrete: {
            double s = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                double v = sign > 0 ? values_[i] : -values_[i];
                if (v > 0) s += probs_[i] * v;
            }
            return s;
        }
    }
    return 0.0;
}

double ChargeLaw::tail(int sign, double z) const {
    switch (kind_) {
        case LawKind::rademacher: return z < 1.0 ? 0.5 : 0.0;
        case LawKind::gaussian: return 0.5 * std::erfc(z / std::sqrt(2.0));
        case LawKind::uniform_symmetric: return z < kSqrt3 ? (kSqrt3 - z) / (2.0 * kSqrt3) : 0.0;
        case LawKind::discrete: {
            double s = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                double v = sign > 0 ? values_[i] : -values_[i];
                if (v > z) s += probs_[i];
            }
            return s;
        }
    }
    return 0.0;
}

double ChargeLaw::exp_neg_abs(double c) const {
    switch (kind_) {
        case LawKind::rademacher: return std::exp(-c);
        case LawKind::gaussian:
            // E exp(-c|q|) = exp(c^2/2) erfc(c/sqrt2) for standard normal
            return std::exp(0.5 * c * c) * std::erfc(c / std::sqrt(2.0));
        case LawKind::uniform_symmetric: {
            if (c < 1e-12) return 1.0;
            return (1.0 - std::exp(-kSqrt3 * c)) / (kSqrt3 * c);
        }
        case LawKind::discrete: {
            double s = 0.0;
            for (std::size_t i = 0; i < values_.size(); ++i) s += probs_[i] * std::exp(-c * std::abs(values_[i]));
            return s;
        }
    }
    return 1.0;
}

ChargeVector sample_charges(const ChargeLaw& law, std::int64_t n, std::uint64_t seed) {
    require(n >= 0, Errc::precondition, "sample_charges: negative n");
    Rng rng(seed);
    ChargeVector out;
    out.integer_valued = law.integer_valued();
    out.q.resize(static_cast<std::size_t>(n));
    for (auto& v : out.q) v = law.sample(rng);
    return out;
}

namespace {

// sup over a signed log-spaced grid of 2 ln E exp(tq) / t^2.  All built-in
// laws have bounded support or are exactly gaussian, so the sup is finite;
// the divergence signal is kept for defensively constructed laws.
double kappa_grid(const ChargeLaw& law) {
    const int points = 400;
    const double t_lo = 1e-3, t_hi = 50.0;
    double best = 0.0, last = 0.0, prev = 0.0;
    for (int sgn = -1; sgn <= 1; sgn += 2) {
        for (int k = 0; k < points; ++k) {
            double t = sgn * t_lo * std::pow(t_hi / t_lo, double(k) / (points - 1));
            double v = 2.0 * std::log(law.mgf(t)) / (t * t);
            if (k == points - 1) {
                last = v;
                if (last > prev && last > 10 * best)
                    fail(Errc::numeric, "charge_moments: kappa grid supremum diverges");
            }
            prev = v;
            best = std::max(best, v);
        }
    }
    return best;
}

// E[min(a X, b Y)] with X = q0^eps, Y = q1^eps' independent, via
// int_0^inf P{aX > z} P{bY > z} dz (both factors are exact law tails).
double expected_min_product(const ChargeLaw& law, int eps0, int eps1) {
    double a = law.mean_signed_part(eps0);
    double b = law.mean_signed_part(eps1);
    if (a <= 0.0 || b <= 0.0) return 0.0;
    if (law.kind() == LawKind::rademacher || law.kind() == LawKind::discrete) {
        // exact double sum over atoms
        double s = 0.0;
        const auto& v = law.values();
        const auto& p = law.probs();
        for (std::size_t i = 0; i < v.size(); ++i) {
            double x = eps0 > 0 ? std::max(v[i], 0.0) : std::max(-v[i], 0.0);
            for (std::size_t j = 0; j < v.size(); ++j) {
                double y = eps1 > 0 ? std::max(v[j], 0.0) : std::max(-v[j], 0.0);
                s += p[i] * p[j] * std::min(a * x, b * y);
            }
        }
        return s;
    }
    // continuous laws: Simpson on [0, zcap]; gaussian tail below 1e-18 past 9 sd
    double zcap = std::max(a, b) * 9.0 + 1.0;
    const int panels = 20000;
    double h = zcap / panels;
    auto f = [&](double z) { return law.tail(eps0, z / a) * law.tail(eps1, z / b); };
    double s = f(0.0) + f(zcap);
    for (int i = 1; i < panels; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

ChargeMoments charge_moments(const ChargeLaw& law) {
    ChargeMoments m;
    m.law = law;
    if (law.kind() == LawKind::rademacher || law.kind() == LawKind::gaussian) {
        m.kappa = 1.0;  // cosh t <= exp(t^2/2); gaussian mgf is exp(t^2/2) exactly
        m.kappa_from_grid = false;
    } else {
        m.kappa = kappa_grid(law);
        m.kappa_from_grid = true;
    }
    m.e_q_plus = law.mean_signed_part(+1);
    m.e_q_minus = law.mean_signed_part(-1);
    m.gamma = std::min(m.e_q_plus * m.e_q_plus, m.e_q_minus * m.e_q_minus);
    double lam = expected_min_product(law, +1, +1);
    lam = std::min(lam, expected_min_product(law, +1, -1));
    lam = std::min(lam, expected_min_product(law, -1, +1));
    lam = std::min(lam, expected_min_product(law, -1, -1));
    m.lambda = lam;
    return m;
}

double ChargeMoments::beta_alpha(double alpha, int d) const {
    require(alpha > 0.0 && alpha < 1.0, Errc::precondition, "beta_alpha: need 0 < alpha < 1");
    require(d >= 1, Errc::precondition, "beta_alpha: need d >= 1");
    require(gamma > 0.0 && lambda > 0.0, Errc::precondition, "beta_alpha: law has gamma or lambda zero");
    return std::log(2.0 * d) * std::max(8.0 / ((1.0 - alpha) * gamma), 4.0 / lambda);
}

double ChargeMoments::rho(double beta, double alpha, int d) const {
    require(alpha > 0.0 && alpha < 1.0, Errc::precondition, "rho: need 0 < alpha < 1");
    require(beta >= 0.0 && d >= 1, Errc::precondition, "rho: need beta >= 0, d >= 1");
    return 2.0 * d * law.exp_neg_abs(beta * alpha * std::sqrt(gamma));
}

}  // namespace polyq
