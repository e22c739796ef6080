#include "polyq/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyq/errors.hpp"

namespace polyq {

OccupationField OccupationField::build(const ChargeVector& q, const std::vector<std::int32_t>& pos, int d) {
    require(q.size() == static_cast<std::int64_t>(pos.size()) / d, Errc::precondition,
            "field: charge/position length mismatch");
    require(d >= 1 && d <= kMaxFieldDim, Errc::unsupported, "field: packed site keys support d <= 4");
    require(q.size() < kCoordLimit, Errc::unsupported, "field: N must stay below 32768 for 16-bit packing");
    OccupationField f;
    f.d_ = d;
    f.sites_.reserve(static_cast<std::size_t>(q.size()));
    for (std::int64_t i = 0; i < q.size(); ++i) {
        std::uint64_t key = pack_site(&pos[static_cast<std::size_t>(i * d)], d);
        SiteStat& st = f.sites_[key];
        st.visits += 1;
        st.charge += q.q[static_cast<std::size_t>(i)];
        st.abs_charge += std::abs(q.q[static_cast<std::size_t>(i)]);
    }
    return f;
}

OccupationField OccupationField::build(const ChargeVector& q, const Walk& w) {
    return build(q, w.positions(), w.dim());
}

std::int64_t OccupationField::total_visits() const {
    std::int64_t t = 0;
    for (const auto& [k, st] : sites_) t += st.visits;
    return t;
}

std::int64_t OccupationField::max_local_time() const {
    std::int64_t m = 0;
    for (const auto& [k, st] : sites_) m = std::max<std::int64_t>(m, st.visits);
    return m;
}

double OccupationField::energy() const {
    double h = 0.0;
    for (const auto& [k, st] : sites_) h += st.charge * st.charge;
    return h;
}

const SiteStat* OccupationField::find(std::uint64_t key) const {
    auto it = sites_.find(key);
    return it == sites_.end() ? nullptr : &it->second;
}

double energy(const ChargeVector& q, const Walk& w) { return OccupationField::build(q, w).energy(); }

double interaction_energy(const ChargeVector& q, const Walk& w) {
    require(q.size() == w.monomers(), Errc::precondition, "interaction_energy: length mismatch");
    auto pos = w.positions();
    int d = w.dim();
    std::int64_t n = q.size();
    double h = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::int64_t j = i + 1; j < n; ++j) {
            bool same = true;
            for (int k = 0; k < d; ++k) {
                if (pos[static_cast<std::size_t>(i * d + k)] != pos[static_cast<std::size_t>(j * d + k)]) {
                    same = false;
                    break;
                }
            }
            if (same) h += q.q[static_cast<std::size_t>(i)] * q.q[static_cast<std::size_t>(j)];
        }
    }
    return h;
}

ParitySignSums parity_sign_sums(const ChargeVector& q) {
    ParitySignSums out;
    for (std::int64_t i = 0; i < q.size(); ++i) {
        double v = q.q[static_cast<std::size_t>(i)];
        int parity = static_cast<int>(i & 1);
        if (v > 0)
            out.s[parity][0] += v;
        else if (v < 0)
            out.s[parity][1] += -v;
    }
    return out;
}

double qbar(const ChargeVector& q, std::int64_t L) {
    std::int64_t n = q.size();
    require(L >= 1 && L <= n - 1, Errc::precondition, "qbar: need 1 <= L <= N-1");
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    for (std::int64_t i = 0; i < n; ++i)
        prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + std::abs(q.q[static_cast<std::size_t>(i)]);
    // The mean over a concatenation dominates the min of the parts, so the
    // minimum over all l >= L is attained with l < 2L; O(NL) instead of O(N^2).
    double best = std::numeric_limits<double>::infinity();
    std::int64_t l_hi = std::min<std::int64_t>(2 * L - 1, n - 1);
    for (std::int64_t l = L; l <= l_hi; ++l)
        for (std::int64_t i = 0; i + l <= n - 1; ++i)
            best = std::min(best, (prefix[static_cast<std::size_t>(i + l)] - prefix[static_cast<std::size_t>(i)]) / static_cast<double>(l));
    return best;
}

}  // namespace polyq
