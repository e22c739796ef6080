#include "polyq/structure.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_set>

#include "polyq/errors.hpp"

namespace polyq {

namespace {

int site_parity(const std::int32_t* x, int d) {
    std::int64_t s = 0;
    for (int k = 0; k < d; ++k) s += x[k];
    return static_cast<int>(((s % 2) + 2) % 2);
}

bool lex_less(const std::int32_t* a, const std::int32_t* b, int d) {
    for (int k = 0; k < d; ++k) {
        if (a[k] != b[k]) return a[k] < b[k];
    }
    return false;
}

std::int64_t l1_dist(const std::int32_t* a, const std::int32_t* b, int d) {
    std::int64_t s = 0;
    for (int k = 0; k < d; ++k) s += std::abs(static_cast<std::int64_t>(a[k]) - b[k]);
    return s;
}

}  // namespace

ArgmaxPoints argmax_points(const OccupationField& field, const std::vector<std::int32_t>& pos, int d) {
    require(d >= 1 && d <= kMaxFieldDim, Errc::unsupported, "argmax_points: d out of supported range");
    ArgmaxPoints out;
    out.d = d;
    bool found[2][2] = {{false, false}, {false, false}};

    std::int32_t coords[kMaxFieldDim];
    for (const auto& [key, st] : field.sites()) {
        unpack_site(key, d, coords);
        int parity = site_parity(coords, d);
        for (int s = 0; s < 2; ++s) {
            double v = (s == 0 ? st.charge : -st.charge);
            if (v <= 0.0) continue;
            ArgmaxPoint& ap = out.p[parity][s];
            if (!found[parity][s] || v > ap.value) {
                found[parity][s] = true;
                ap.value = v;
                ap.degenerate = false;
                ap.fallback = false;
                std::copy(coords, coords + d, ap.x.begin());
            } else if (v == ap.value) {
                ap.degenerate = true;
                if (lex_less(coords, ap.x.data(), d)) std::copy(coords, coords + d, ap.x.begin());
            }
        }
    }

    // fallback: the max of eps Q over all of Z^d is 0, attained off the range;
    // take the lexicographically smallest unvisited site of the right parity
    // in the bounding box expanded by 2 (the expanded corner is never visited)
    bool any_fallback = false;
    for (int p = 0; p < 2 && !any_fallback; ++p)
        for (int s = 0; s < 2; ++s) any_fallback = any_fallback || !found[p][s];
    if (any_fallback) {
        std::int32_t lo[kMaxFieldDim];
        for (int k = 0; k < d; ++k) lo[k] = std::numeric_limits<std::int32_t>::max();
        std::int64_t n = static_cast<std::int64_t>(pos.size()) / d;
        for (std::int64_t i = 0; i < n; ++i)
            for (int k = 0; k < d; ++k) lo[k] = std::min(lo[k], pos[static_cast<std::size_t>(i * d + k)]);
        std::int32_t corner[kMaxFieldDim];
        for (int k = 0; k < d; ++k) corner[k] = lo[k] - 2;
        for (int p = 0; p < 2; ++p) {
            for (int s = 0; s < 2; ++s) {
                if (found[p][s]) continue;
                ArgmaxPoint& ap = out.p[p][s];
                std::copy(corner, corner + d, ap.x.begin());
                if (site_parity(ap.x.data(), d) != p) ap.x[d - 1] += 1;  // lex-next flips parity
                ap.value = 0.0;
                ap.fallback = true;
            }
        }
    }
    return out;
}

double distance_to_optimality(const ParitySignSums& sums, const ArgmaxPoints& points) {
    double dn = 0.0;
    for (int p = 0; p < 2; ++p)
        for (int s = 0; s < 2; ++s) dn += sums.s[p][s] * (sums.s[p][s] - points.p[p][s].value);
    return dn;
}

double max_energy_formula(const ChargeVector& q) {
    ParitySignSums s = parity_sign_sums(q);
    return s.s[0][0] * s.s[0][0] + s.s[0][1] * s.s[0][1] + s.s[1][0] * s.s[1][0] + s.s[1][1] * s.s[1][1];
}

Walk optimal_trajectory(const ChargeVector& q, int d) {
    require(d >= 2, Errc::precondition, "optimal_trajectory: needs d >= 2");
    require(q.size() >= 1, Errc::precondition, "optimal_trajectory: empty charge vector");
    // sigma sites in the first two coordinates; remaining axes stay 0
    std::int32_t even_site[2][2] = {{0, 0}, {1, 1}};  // [0]: "+", [1]: "-"
    const std::int32_t odd_site[2][2] = {{0, 1}, {1, 0}};
    if (q.q[0] < 0.0) {
        std::swap(even_site[0][0], even_site[1][0]);
        std::swap(even_site[0][1], even_site[1][1]);
    }
    std::int64_t n = q.size();
    std::vector<std::int32_t> pos(static_cast<std::size_t>(n * d), 0);
    for (std::int64_t i = 0; i < n; ++i) {
        int sign = q.q[static_cast<std::size_t>(i)] < 0.0 ? 1 : 0;
        const std::int32_t* site = (i & 1) ? odd_site[sign] : even_site[sign];
        pos[static_cast<std::size_t>(i * d)] = site[0];
        pos[static_cast<std::size_t>(i * d + 1)] = site[1];
    }
    return Walk::from_positions(d, pos);
}

Walk d1_strategy(const ChargeVector& q, int eps) {
    require(eps == 1 || eps == -1, Errc::precondition, "d1_strategy: eps must be +-1");
    std::int64_t n = q.size();
    require(n >= 1, Errc::precondition, "d1_strategy: empty charge vector");
    std::vector<std::int32_t> pos(static_cast<std::size_t>(n), 0);
    auto sgn = [&](std::int64_t i) { return q.q[static_cast<std::size_t>(i)] < 0.0 ? -1 : +1; };
    for (std::int64_t i = 1; i < n; i += 2) pos[static_cast<std::size_t>(i)] = sgn(i);
    for (std::int64_t i = 2; i < n; i += 2) {
        std::int32_t left = pos[static_cast<std::size_t>(i - 1)];
        std::int32_t right = (i + 1 < n) ? sgn(i + 1) : left;  // last monomer: only one neighbour
        if (left == right && sgn(i) == eps) pos[static_cast<std::size_t>(i)] = 2 * left;
    }
    return Walk::from_positions(1, pos);
}

GapBound lambda_gap_bound(const ChargeVector& q, const ArgmaxPoints& points) {
    GapBound out;
    ParitySignSums sums = parity_sign_sums(q);
    double gamma = std::numeric_limits<double>::infinity();
    for (int p = 0; p < 2; ++p)
        for (int s = 0; s < 2; ++s) gamma = std::min(gamma, sums.s[p][s] * sums.s[p][s]);
    out.gamma_emp = gamma;

    double lambda = std::numeric_limits<double>::infinity();
    std::int64_t n = q.size();
    for (int so = 0; so < 2; ++so) {
        for (int se = 0; se < 2; ++se) {
            // sum over odd i of min(Q^odd_eps q_i^eps, Q^even_eps' q_{i-1}^eps')
            double total = 0.0;
            double q_odd = sums.s[1][so], q_even = sums.s[0][se];
            for (std::int64_t i = 1; i < n; i += 2) {
                double qi = q.q[static_cast<std::size_t>(i)];
                double qp = q.q[static_cast<std::size_t>(i - 1)];
                double part_i = so == 0 ? std::max(qi, 0.0) : std::max(-qi, 0.0);
                double part_p = se == 0 ? std::max(qp, 0.0) : std::max(-qp, 0.0);
                total += std::min(q_odd * part_i, q_even * part_p);
            }
            lambda = std::min(lambda, total);
            bool adjacent = l1_dist(points.p[1][so].x.data(), points.p[0][se].x.data(), points.d) == 1;
            if (!adjacent && (!out.applicable || total > out.bound)) {
                out.applicable = true;
                out.bound = total;
                out.pair_eps_odd = so == 0 ? +1 : -1;
                out.pair_eps_even = se == 0 ? +1 : -1;
            }
        }
    }
    out.lambda_emp = lambda;
    return out;
}

EventRecord detect_events(const ChargeVector& q, const std::vector<std::int32_t>& pos, int d, double alpha) {
    require(d >= 2, Errc::precondition, "detect_events: unit squares need d >= 2");
    require(alpha > 0.0 && alpha < 1.0, Errc::precondition, "detect_events: need 0 < alpha < 1");
    require(q.size() == static_cast<std::int64_t>(pos.size()) / d, Errc::precondition,
            "detect_events: charge/position length mismatch");

    EventRecord rec;
    OccupationField field = OccupationField::build(q, pos, d);
    std::int64_t n = q.size();

    double total_abs = 0.0;
    for (std::int64_t i = 0; i < n; ++i) total_abs += std::abs(q.q[static_cast<std::size_t>(i)]);
    const double thresh = 0.5 * (1.0 + alpha) * total_abs;
    const double slack = 1e-12 * std::max(1.0, total_abs);

    // scan every unit square touching a visited site; a square is identified
    // by its minimal corner and axis pair
    UnitSquare best{};
    std::int32_t corner[kMaxFieldDim], probe[kMaxFieldDim], site[kMaxFieldDim];
    int qualifying = 0;
    for (int a = 0; a < d && qualifying < 2; ++a) {
        for (int b = a + 1; b < d && qualifying < 2; ++b) {
            std::unordered_set<std::uint64_t> seen;
            for (const auto& [key, st] : field.sites()) {
                unpack_site(key, d, site);
                for (int da = 0; da <= 1; ++da) {
                    for (int db = 0; db <= 1; ++db) {
                        std::copy(site, site + d, corner);
                        corner[a] -= da;
                        corner[b] -= db;
                        if (!seen.insert(pack_site(corner, d)).second) continue;
                        double mass = 0.0;
                        for (int ca = 0; ca <= 1; ++ca) {
                            for (int cb = 0; cb <= 1; ++cb) {
                                std::copy(corner, corner + d, probe);
                                probe[a] += ca;
                                probe[b] += cb;
                                if (const SiteStat* s = field.find(pack_site(probe, d))) mass += s->abs_charge;
                            }
                        }
                        if (mass >= thresh - slack) {
                            ++qualifying;
                            best.corner.fill(0);
                            std::copy(corner, corner + d, best.corner.begin());
                            best.axis_a = a;
                            best.axis_b = b;
                            if (qualifying >= 2) break;
                        }
                    }
                    if (qualifying >= 2) break;
                }
                if (qualifying >= 2) break;
            }
        }
    }
    rec.qualifying_squares = qualifying;
    rec.s_alpha = qualifying == 1;
    rec.r_alpha = n;
    if (rec.s_alpha) {
        rec.square = best;
        for (std::int64_t i = 0; i < n; ++i) {
            const std::int32_t* x = &pos[static_cast<std::size_t>(i * d)];
            bool inside = true;
            for (int k = 0; k < d && inside; ++k) {
                std::int32_t delta = x[k] - best.corner[static_cast<std::size_t>(k)];
                std::int32_t hi = (k == best.axis_a || k == best.axis_b) ? 1 : 0;
                inside = delta >= 0 && delta <= hi;
            }
            if (inside) {
                rec.r_alpha = i;
                break;
            }
        }
    }

    // C_alpha: per-class concentration plus pairwise-adjacent argmax sites.
    // Degenerate argmaxes (ties, or classes with no positive site) fail the
    // event so that C_alpha => S_alpha can hold on every input.
    ArgmaxPoints pts = argmax_points(field, pos, d);
    ParitySignSums sums = parity_sign_sums(q);
    bool ok = true;
    for (int p = 0; p < 2 && ok; ++p) {
        for (int s = 0; s < 2 && ok; ++s) {
            const ArgmaxPoint& ap = pts.p[p][s];
            rec.argmax_degenerate = rec.argmax_degenerate || ap.degenerate;
            if (ap.degenerate || ap.fallback) ok = false;
            if (ap.value < 0.5 * (1.0 + alpha) * sums.s[p][s] - slack) ok = false;
        }
    }
    if (ok) {
        for (int so = 0; so < 2 && ok; ++so)
            for (int se = 0; se < 2 && ok; ++se)
                ok = l1_dist(pts.p[1][so].x.data(), pts.p[0][se].x.data(), d) == 1;
        // distinctness within each parity (cross-parity pairs differ by adjacency)
        ok = ok && l1_dist(pts.p[0][0].x.data(), pts.p[0][1].x.data(), d) != 0;
        ok = ok && l1_dist(pts.p[1][0].x.data(), pts.p[1][1].x.data(), d) != 0;
    }
    rec.c_alpha = ok;
    return rec;
}

EventRecord detect_events(const ChargeVector& q, const Walk& w, double alpha) {
    return detect_events(q, w.positions(), w.dim(), alpha);
}

double diam_log_bound(const ChargeVector& q, int d, double beta, double alpha, std::int64_t L) {
    require(d >= 1, Errc::precondition, "diam_log_bound: d >= 1");
    require(L >= 1, Errc::precondition, "diam_log_bound: L >= 1");
    ParitySignSums sums = parity_sign_sums(q);
    double gamma = std::numeric_limits<double>::infinity();
    for (int p = 0; p < 2; ++p)
        for (int s = 0; s < 2; ++s) gamma = std::min(gamma, sums.s[p][s] * sums.s[p][s]);
    double n = static_cast<double>(q.size());
    double rate = std::log(2.0 * d) - 2.0 * beta * alpha * std::sqrt(gamma) * qbar(q, L) / n;
    return n * n * std::exp(static_cast<double>(L) * rate);
}

}  // namespace polyq
