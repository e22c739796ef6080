#include "polyq/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "polyq/errors.hpp"
#include "polyq/structure.hpp"

namespace polyq {

namespace {

// dense local-time grids are worth it only while they fit comfortably
constexpr std::int64_t kDenseCellCap = std::int64_t{1} << 24;

// fold-window caps keep the bridge DP box small per dimension
std::int64_t max_window(int d) {
    switch (d) {
        case 1: return 32;
        case 2: return 32;
        case 3: return 16;
        default: return 10;
    }
}

}  // namespace

struct Chain::FoldPlan {
    std::int64_t a = 0, b = 0;                // window [a, b), 1 <= a < b <= n-1
    std::vector<std::int32_t> targets;        // (b-a) x d folded positions
    bool folded = false;                      // current window already equals targets
    double bridges = 0.0;                     // lattice bridges pos[a-1] -> pos[b] in b-a+1 steps
};

Chain::Chain(const GibbsSpec& spec, const ChargeVector& q, const Walk& start, std::uint64_t seed)
    : spec_(spec), q_(q), rng_(seed) {
    spec_.validate();
    require(q_.size() == spec_.n, Errc::precondition, "chain: charge count != monomer count");
    require(start.dim() == spec_.d && start.monomers() == spec_.n, Errc::precondition,
            "chain: start walk has wrong shape");
    require(spec_.d <= kMaxFieldDim, Errc::unsupported, "chain: dimension too large for site packing");
    require(spec_.n < kCoordLimit, Errc::unsupported, "chain: walk range exceeds site packing");

    pos_ = start.positions();
    steps_ = start.steps();

    const int d = spec_.d;
    side_ = 2 * spec_.n - 1;
    shift_ = spec_.n - 1;
    double cells = 1.0;
    for (int k = 0; k < d; ++k) cells *= static_cast<double>(side_);
    dense_ = cells <= static_cast<double>(kDenseCellCap);
    if (dense_) {
        strides_.assign(static_cast<std::size_t>(d), 1);
        for (int k = d - 2; k >= 0; --k) strides_[static_cast<std::size_t>(k)] = strides_[static_cast<std::size_t>(k + 1)] * side_;
        grid_q_.assign(static_cast<std::size_t>(cells), 0.0);
        grid_l_.assign(static_cast<std::size_t>(cells), 0);
    }

    for (std::int64_t i = 0; i < spec_.n; ++i) add_monomer(i, &pos_[static_cast<std::size_t>(i * d)]);
    refresh();
}

double Chain::site_q(const std::int32_t* x) const {
    if (dense_) {
        std::int64_t c = 0;
        for (int k = 0; k < spec_.d; ++k) c += (x[k] + shift_) * strides_[static_cast<std::size_t>(k)];
        return grid_q_[static_cast<std::size_t>(c)];
    }
    auto it = map_.find(pack_site(x, spec_.d));
    return it == map_.end() ? 0.0 : it->second.first;
}

std::int32_t Chain::site_l(const std::int32_t* x) const {
    if (dense_) {
        std::int64_t c = 0;
        for (int k = 0; k < spec_.d; ++k) c += (x[k] + shift_) * strides_[static_cast<std::size_t>(k)];
        return grid_l_[static_cast<std::size_t>(c)];
    }
    auto it = map_.find(pack_site(x, spec_.d));
    return it == map_.end() ? 0 : it->second.second;
}

void Chain::add_monomer(std::int64_t i, const std::int32_t* x) {
    const double qi = q_.q[static_cast<std::size_t>(i)];
    if (dense_) {
        std::int64_t c = 0;
        for (int k = 0; k < spec_.d; ++k) c += (x[k] + shift_) * strides_[static_cast<std::size_t>(k)];
        double& Q = grid_q_[static_cast<std::size_t>(c)];
        h_ += qi * (2.0 * Q + qi);
        Q += qi;
        ++grid_l_[static_cast<std::size_t>(c)];
    } else {
        auto& slot = map_[pack_site(x, spec_.d)];
        h_ += qi * (2.0 * slot.first + qi);
        slot.first += qi;
        ++slot.second;
    }
}

void Chain::remove_monomer(std::int64_t i, const std::int32_t* x) {
    const double qi = q_.q[static_cast<std::size_t>(i)];
    if (dense_) {
        std::int64_t c = 0;
        for (int k = 0; k < spec_.d; ++k) c += (x[k] + shift_) * strides_[static_cast<std::size_t>(k)];
        double& Q = grid_q_[static_cast<std::size_t>(c)];
        Q -= qi;
        h_ -= qi * (2.0 * Q + qi);
        if (--grid_l_[static_cast<std::size_t>(c)] == 0) Q = 0.0;  // kill float residue on empty sites
    } else {
        auto it = map_.find(pack_site(x, spec_.d));
        it->second.first -= qi;
        h_ -= qi * (2.0 * it->second.first + qi);
        if (--it->second.second == 0) map_.erase(it);
    }
}

// replace increment i by `code`, translating monomers i+1..n-1 rigidly;
// returns the energy change and leaves the chain in the new state
static void shift_delta(std::int32_t* delta, Step old_s, Step new_s, int d) {
    std::fill(delta, delta + d, 0);
    delta[new_s.axis] += new_s.dir;
    delta[old_s.axis] -= old_s.dir;
}

double Chain::peek_suffix_shift(std::int64_t i, int code) {
    const int old_code = step_code(steps_[static_cast<std::size_t>(i)]);
    if (code == old_code) return 0.0;
    const double before = h_;
    apply_suffix_shift(i, code);
    const double delta = h_ - before;
    apply_suffix_shift(i, old_code);
    return delta;
}

void Chain::apply_suffix_shift(std::int64_t i, int code) {
    require(i >= 0 && i < spec_.n - 1, Errc::precondition, "suffix shift: increment index out of range");
    require(code >= 0 && code < 2 * spec_.d, Errc::precondition, "suffix shift: bad step code");
    Step& s = steps_[static_cast<std::size_t>(i)];
    const Step ns = step_from_code(code);
    if (ns == s) return;

    const int d = spec_.d;
    std::int32_t delta[kMaxFieldDim];
    shift_delta(delta, s, ns, d);

    for (std::int64_t j = spec_.n - 1; j > i; --j) remove_monomer(j, &pos_[static_cast<std::size_t>(j * d)]);
    for (std::int64_t j = i + 1; j < spec_.n; ++j) {
        std::int32_t* x = &pos_[static_cast<std::size_t>(j * d)];
        for (int k = 0; k < d; ++k) x[k] += delta[k];
        add_monomer(j, x);
    }
    s = ns;
}

void Chain::refresh() {
    const int d = spec_.d;
    double h = 0.0, comp = 0.0;  // Neumaier: H = sum_i q_i Q(S_i)
    std::int64_t ls = 0;
    for (std::int64_t i = 0; i < spec_.n; ++i) {
        const std::int32_t* x = &pos_[static_cast<std::size_t>(i * d)];
        const double term = q_.q[static_cast<std::size_t>(i)] * site_q(x);
        const double t = h + term;
        comp += std::abs(h) >= std::abs(term) ? (h - t) + term : (term - t) + h;
        h = t;
        ls = std::max<std::int64_t>(ls, site_l(x));
    }
    h += comp;
    if (q_.integer_valued) {
        require(h == h_, Errc::numeric, "chain: incremental energy drifted (integer charges)");
    } else {
        require(std::abs(h - h_) <= 1e-6 * std::max(1.0, std::abs(h)), Errc::numeric,
                "chain: incremental energy drifted");
    }
    h_ = h;
    lstar_ = ls;
}

void Chain::enable_rewire(double attempts_per_sweep, double mean_window) {
    require(attempts_per_sweep >= 0.0 && attempts_per_sweep <= 1.0, Errc::config,
            "rewire rate must lie in [0, 1]");
    require(mean_window >= 1.0, Errc::config, "rewire mean window must be >= 1");
    rewire_ = attempts_per_sweep > 0.0;
    rewire_rate_ = attempts_per_sweep;
    rewire_mean_window_ = mean_window;
}

void Chain::sweep() {
    const std::int64_t props = spec_.n - 1;
    const double beta_over_n = spec_.beta / static_cast<double>(spec_.n);
    for (std::int64_t t = 0; t < props; ++t) {
        const std::int64_t i = static_cast<std::int64_t>(rng_.below(static_cast<std::uint32_t>(props)));
        const int code = static_cast<int>(rng_.below(static_cast<std::uint32_t>(2 * spec_.d)));
        ++counters_.proposed_shift;
        const Step old_s = steps_[static_cast<std::size_t>(i)];
        const int old_code = step_code(old_s);
        if (code == old_code) {  // proposing the current increment: always accepted
            ++counters_.accepted_shift;
            continue;
        }
        const double before = h_;
        apply_suffix_shift(i, code);
        double log_r = beta_over_n * (h_ - before);
        if (spec_.pulled()) {
            const Step ns = step_from_code(code);
            log_r += spec_.pull_at(ns.axis) * ns.dir - spec_.pull_at(old_s.axis) * old_s.dir;
        }
        if (log_r >= 0.0 || rng_.uniform() < std::exp(log_r)) {
            ++counters_.accepted_shift;
        } else {
            apply_suffix_shift(i, old_code);
        }
    }
    if (rewire_ && rng_.uniform() < rewire_rate_) try_rewire();
    refresh();
}

// ---- fold/unfold ----------------------------------------------------------

bool Chain::plan_fold(std::int64_t a, std::int64_t b, FoldPlan& plan) {
    const int d = spec_.d;
    const std::int64_t len = b - a;
    plan.a = a;
    plan.b = b;

    // charge field with the window removed; both directions of the move see
    // the same outside configuration, so the targets are proposal-symmetric
    std::unordered_map<std::uint64_t, double> inside;
    inside.reserve(static_cast<std::size_t>(2 * len));
    for (std::int64_t j = a; j < b; ++j)
        inside[pack_site(&pos_[static_cast<std::size_t>(j * d)], d)] += q_.q[static_cast<std::size_t>(j)];

    // argmax of eps * Q_outside per (parity, sign) class over outside-visited
    // sites; lexicographic tie-break keeps the map deterministic
    bool found[2][2] = {{false, false}, {false, false}};
    double best[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    std::int32_t bx[2][2][kMaxFieldDim];
    auto consider = [&](std::int64_t i) {
        const std::int32_t* x = &pos_[static_cast<std::size_t>(i * d)];
        const std::uint64_t key = pack_site(x, d);
        double qout = site_q(x);
        if (auto it = inside.find(key); it != inside.end()) qout -= it->second;
        const int par = static_cast<int>(i & 1);  // site parity == monomer parity on a walk
        for (int s = 0; s < 2; ++s) {
            const double v = s == 0 ? qout : -qout;
            if (v <= 0.0) continue;
            bool better = !found[par][s] || v > best[par][s];
            if (!better && v == best[par][s]) {
                better = std::lexicographical_compare(x, x + d, bx[par][s], bx[par][s] + d);
            }
            if (better) {
                found[par][s] = true;
                best[par][s] = v;
                std::copy(x, x + d, bx[par][s]);
            }
        }
    };
    for (std::int64_t i = 0; i < a; ++i) consider(i);
    for (std::int64_t i = b; i < spec_.n; ++i) consider(i);

    plan.targets.assign(static_cast<std::size_t>(len * d), 0);
    for (std::int64_t j = a; j < b; ++j) {
        const int par = static_cast<int>(j & 1);
        const int s = q_.q[static_cast<std::size_t>(j)] < 0.0 ? 1 : 0;
        if (!found[par][s]) return false;  // no strictly positive site for this class
        std::copy(bx[par][s], bx[par][s] + d, &plan.targets[static_cast<std::size_t>((j - a) * d)]);
    }

    // the folded window must still be a nearest-neighbour walk
    std::int64_t dist = 0;
    for (int k = 0; k < d; ++k)
        dist += std::abs(static_cast<std::int64_t>(pos_[static_cast<std::size_t>((a - 1) * d + k)]) - plan.targets[static_cast<std::size_t>(k)]);
    if (dist != 1) return false;
    for (std::int64_t j = 0; j + 1 < len; ++j) {
        dist = 0;
        for (int k = 0; k < d; ++k)
            dist += std::abs(static_cast<std::int64_t>(plan.targets[static_cast<std::size_t>(j * d + k)]) -
                             plan.targets[static_cast<std::size_t>((j + 1) * d + k)]);
        if (dist != 1) return false;
    }
    dist = 0;
    for (int k = 0; k < d; ++k)
        dist += std::abs(static_cast<std::int64_t>(plan.targets[static_cast<std::size_t>((len - 1) * d + k)]) -
                         pos_[static_cast<std::size_t>(b * d + k)]);
    if (dist != 1) return false;

    plan.folded = std::equal(plan.targets.begin(), plan.targets.end(), &pos_[static_cast<std::size_t>(a * d)]);
    plan.bridges = bridge_count(&pos_[static_cast<std::size_t>((a - 1) * d)], &pos_[static_cast<std::size_t>(b * d)], len + 1);
    return plan.bridges >= 1.0;
}

// number of nearest-neighbour paths from -> to with `steps` steps, by dense
// DP in a box of radius `steps` around `from`; dp_bwd_ keeps all layers so a
// uniform bridge can be sampled forward against the remaining-count table
double Chain::bridge_count(const std::int32_t* from, const std::int32_t* to, std::int64_t steps) {
    const int d = spec_.d;
    const std::int64_t r = steps;
    const std::int64_t box_side = 2 * r + 1;
    std::int64_t box = 1;
    for (int k = 0; k < d; ++k) box *= box_side;

    std::int64_t manhattan = 0;
    for (int k = 0; k < d; ++k) manhattan += std::abs(static_cast<std::int64_t>(to[k]) - from[k]);
    if (manhattan > steps || ((steps - manhattan) & 1)) return 0.0;

    dp_bwd_.assign(static_cast<std::size_t>(box * (steps + 1)), 0.0);
    // layer t at offset t*box: counts of paths v -> to in steps - t steps
    std::int64_t to_cell = 0;
    std::vector<std::int64_t> st(static_cast<std::size_t>(d), 1);
    for (int k = d - 2; k >= 0; --k) st[static_cast<std::size_t>(k)] = st[static_cast<std::size_t>(k + 1)] * box_side;
    for (int k = 0; k < d; ++k) to_cell += (to[k] - from[k] + r) * st[static_cast<std::size_t>(k)];
    dp_bwd_[static_cast<std::size_t>(steps * box + to_cell)] = 1.0;

    // sweep layers backwards; only cells within L1 distance t of `from` and
    // steps-t of `to` can be nonzero, but a full box pass is simpler and the
    // box is small (window caps keep box*steps < ~5e6)
    for (std::int64_t t = steps - 1; t >= 0; --t) {
        double* cur = &dp_bwd_[static_cast<std::size_t>(t * box)];
        const double* nxt = &dp_bwd_[static_cast<std::size_t>((t + 1) * box)];
        for (std::int64_t c = 0; c < box; ++c) {
            double acc = 0.0;
            std::int64_t rem = c;
            for (int k = 0; k < d; ++k) {
                const std::int64_t coord = rem / st[static_cast<std::size_t>(k)];
                rem %= st[static_cast<std::size_t>(k)];
                if (coord > 0) acc += nxt[c - st[static_cast<std::size_t>(k)]];
                if (coord < box_side - 1) acc += nxt[c + st[static_cast<std::size_t>(k)]];
            }
            cur[c] = acc;
        }
    }
    std::int64_t from_cell = 0;
    for (int k = 0; k < d; ++k) from_cell += r * st[static_cast<std::size_t>(k)];
    return dp_bwd_[static_cast<std::size_t>(from_cell)];
}

// uniform lattice bridge from -> to; requires the dp_bwd_ table filled by the
// matching bridge_count call
bool Chain::sample_bridge(const std::int32_t* from, const std::int32_t* to, std::int64_t steps,
                          std::vector<std::int32_t>& out) {
    const int d = spec_.d;
    const std::int64_t r = steps;
    const std::int64_t box_side = 2 * r + 1;
    std::int64_t box = 1;
    for (int k = 0; k < d; ++k) box *= box_side;
    std::vector<std::int64_t> st(static_cast<std::size_t>(d), 1);
    for (int k = d - 2; k >= 0; --k) st[static_cast<std::size_t>(k)] = st[static_cast<std::size_t>(k + 1)] * box_side;

    out.assign(static_cast<std::size_t>((steps - 1) * d), 0);
    std::int32_t cur[kMaxFieldDim];
    std::copy(from, from + d, cur);
    std::int64_t cell = 0;
    for (int k = 0; k < d; ++k) cell += r * st[static_cast<std::size_t>(k)];

    for (std::int64_t t = 0; t < steps - 1; ++t) {
        const double* nxt = &dp_bwd_[static_cast<std::size_t>((t + 1) * box)];
        const double total = dp_bwd_[static_cast<std::size_t>(t * box + cell)];
        if (total <= 0.0) return false;
        double u = rng_.uniform() * total;
        std::int64_t chosen = -1;
        int ax = 0, dir = 0;
        std::int64_t rem = cell;
        std::int64_t coords[kMaxFieldDim];
        for (int k = 0; k < d; ++k) {
            coords[k] = rem / st[static_cast<std::size_t>(k)];
            rem %= st[static_cast<std::size_t>(k)];
        }
        for (int k = 0; k < d && chosen < 0; ++k) {
            if (coords[k] < box_side - 1) {
                const double w = nxt[cell + st[static_cast<std::size_t>(k)]];
                if (u < w) {
                    chosen = cell + st[static_cast<std::size_t>(k)];
                    ax = k;
                    dir = +1;
                    break;
                }
                u -= w;
            }
            if (coords[k] > 0) {
                const double w = nxt[cell - st[static_cast<std::size_t>(k)]];
                if (u < w) {
                    chosen = cell - st[static_cast<std::size_t>(k)];
                    ax = k;
                    dir = -1;
                    break;
                }
                u -= w;
            }
        }
        if (chosen < 0) {  // float round-off at the boundary: take the last viable move
            for (int k = d - 1; k >= 0 && chosen < 0; --k) {
                if (coords[k] > 0 && nxt[cell - st[static_cast<std::size_t>(k)]] > 0.0) {
                    chosen = cell - st[static_cast<std::size_t>(k)];
                    ax = k;
                    dir = -1;
                } else if (coords[k] < box_side - 1 && nxt[cell + st[static_cast<std::size_t>(k)]] > 0.0) {
                    chosen = cell + st[static_cast<std::size_t>(k)];
                    ax = k;
                    dir = +1;
                }
            }
            if (chosen < 0) return false;
        }
        cell = chosen;
        cur[ax] = static_cast<std::int32_t>(cur[ax] + dir);
        std::copy(cur, cur + d, &out[static_cast<std::size_t>(t * d)]);
    }
    // the DP guarantees the final step lands on `to`
    (void)to;
    return true;
}

// One reversible fold/unfold attempt.  From a non-folded window the proposal
// is the deterministic fold onto the per-class argmax sites, accepted with
// min(1, e^{beta dH / n} / M); from the folded window the proposal is a
// uniformly random bridge (M of them), accepted with min(1, e^{beta dH/n} M).
// The pair satisfies detailed balance; windows exclude both endpoints so the
// pulling tilt never enters.
void Chain::try_rewire() {
    ++counters_.proposed_rewire;
    const std::int64_t n = spec_.n;
    if (n < 4) {
        ++counters_.inapplicable_rewire;
        return;
    }
    // geometric window length, mean rewire_mean_window_, capped for the DP box
    const double p = 1.0 / rewire_mean_window_;
    const std::int64_t wmax = std::min<std::int64_t>(max_window(spec_.d), n - 2);
    std::int64_t len = 1;
    while (len < wmax && rng_.uniform() >= p) ++len;
    if (len > n - 2) {
        ++counters_.inapplicable_rewire;
        return;
    }
    const std::int64_t a = 1 + static_cast<std::int64_t>(rng_.below(static_cast<std::uint32_t>(n - 1 - len)));
    const std::int64_t b = a + len;

    FoldPlan plan;
    if (!plan_fold(a, b, plan)) {
        ++counters_.inapplicable_rewire;
        return;
    }

    const int d = spec_.d;
    const double beta_over_n = spec_.beta / static_cast<double>(n);
    scratch_pos_.assign(pos_.begin() + static_cast<std::ptrdiff_t>(a * d),
                        pos_.begin() + static_cast<std::ptrdiff_t>(b * d));

    std::vector<std::int32_t> proposal;
    double log_prop = 0.0;  // log of (reverse proposal prob / forward proposal prob)
    if (plan.folded) {
        // unfold: uniform bridge; reverse move is the deterministic fold
        if (!sample_bridge(&pos_[static_cast<std::size_t>((a - 1) * d)], &pos_[static_cast<std::size_t>(b * d)],
                           len + 1, proposal)) {
            ++counters_.inapplicable_rewire;
            return;
        }
        log_prop = std::log(plan.bridges);
    } else {
        proposal = plan.targets;
        log_prop = -std::log(plan.bridges);
    }

    const double before = h_;
    for (std::int64_t j = b - 1; j >= a; --j) remove_monomer(j, &pos_[static_cast<std::size_t>(j * d)]);
    for (std::int64_t j = a; j < b; ++j) {
        std::copy(&proposal[static_cast<std::size_t>((j - a) * d)], &proposal[static_cast<std::size_t>((j - a + 1) * d)],
                  &pos_[static_cast<std::size_t>(j * d)]);
        add_monomer(j, &pos_[static_cast<std::size_t>(j * d)]);
    }
    const double log_r = beta_over_n * (h_ - before) + log_prop;
    if (log_r >= 0.0 || rng_.uniform() < std::exp(log_r)) {
        ++counters_.accepted_rewire;
        // re-derive the window increments from the new positions
        for (std::int64_t j = a - 1; j < b; ++j) {
            const std::int32_t* x0 = &pos_[static_cast<std::size_t>(j * d)];
            const std::int32_t* x1 = &pos_[static_cast<std::size_t>((j + 1) * d)];
            for (int k = 0; k < d; ++k) {
                if (x1[k] != x0[k]) {
                    steps_[static_cast<std::size_t>(j)] =
                        Step{static_cast<std::uint8_t>(k), static_cast<std::int8_t>(x1[k] - x0[k])};
                    break;
                }
            }
        }
    } else {
        for (std::int64_t j = b - 1; j >= a; --j) remove_monomer(j, &pos_[static_cast<std::size_t>(j * d)]);
        for (std::int64_t j = a; j < b; ++j) {
            std::copy(&scratch_pos_[static_cast<std::size_t>((j - a) * d)],
                      &scratch_pos_[static_cast<std::size_t>((j - a + 1) * d)], &pos_[static_cast<std::size_t>(j * d)]);
            add_monomer(j, &pos_[static_cast<std::size_t>(j * d)]);
        }
    }
}

// ---- driver ----------------------------------------------------------------

namespace {

Walk make_start(const GibbsSpec& spec, const ChargeVector& q, bool cold, Rng& rng) {
    if (cold) {
        return spec.d >= 2 ? optimal_trajectory(q, spec.d) : d1_strategy(q, +1);
    }
    return Walk::uniform(spec.d, spec.n, rng);
}

}  // namespace

McmcResult metropolis_run(const GibbsSpec& spec, const ChargeVector& q,
                          const std::vector<PathObservable>& obs, const McmcOptions& opt) {
    spec.validate();
    require(opt.sweeps >= 8, Errc::config, "mcmc: need at least 8 measured sweeps");
    require(opt.chains >= 1, Errc::config, "mcmc: need at least one chain");

    McmcResult out;
    out.chains.reserve(static_cast<std::size_t>(opt.chains));
    const std::size_t m = obs.size();

    for (int c = 0; c < opt.chains; ++c) {
        const std::uint64_t cseed = derive_seed(spec.seed, static_cast<std::uint64_t>(c));
        Rng start_rng(derive_seed(cseed, 1));
        Walk start = make_start(spec, q, opt.cold_start, start_rng);
        Chain chain(spec, q, start, derive_seed(cseed, 2));
        if (opt.rewire) chain.enable_rewire(opt.rewire_rate, opt.rewire_mean_window);

        ChainResult cr;
        if (opt.burn_in >= 0) {
            for (std::int64_t s = 0; s < opt.burn_in; ++s) chain.sweep();
            cr.burn_in_used = opt.burn_in;
        } else {
            // pilot trace sets the burn-in to ten autocorrelation times
            const std::int64_t pilot = std::clamp<std::int64_t>(opt.sweeps / 10, 200, 2000);
            std::vector<double> htrace;
            htrace.reserve(static_cast<std::size_t>(pilot));
            for (std::int64_t s = 0; s < pilot; ++s) {
                chain.sweep();
                htrace.push_back(chain.h());
            }
            const double tau = sokal_tau(htrace);
            const std::int64_t want = static_cast<std::int64_t>(std::ceil(10.0 * tau));
            for (std::int64_t s = pilot; s < want; ++s) chain.sweep();
            cr.burn_in_used = std::max(pilot, want);
        }

        std::vector<std::vector<double>> traces(m);
        for (auto& t : traces) t.reserve(static_cast<std::size_t>(opt.sweeps));
        std::vector<double> htrace;
        htrace.reserve(static_cast<std::size_t>(opt.sweeps));
        const Chain::Counters base = chain.counters();
        for (std::int64_t s = 0; s < opt.sweeps; ++s) {
            chain.sweep();
            const PathView v = chain.view();
            for (std::size_t k = 0; k < m; ++k) traces[k].push_back(obs[k](v));
            htrace.push_back(chain.h());
        }

        cr.obs.reserve(m);
        for (std::size_t k = 0; k < m; ++k) cr.obs.push_back(batch_means(traces[k]));
        const Estimate eh = batch_means(htrace);
        cr.tau_h = eh.tau;
        cr.unconverged = cr.tau_h > static_cast<double>(opt.sweeps) / 50.0;

        const Chain::Counters& fin = chain.counters();
        const auto dp = fin.proposed_shift - base.proposed_shift;
        const auto da = fin.accepted_shift - base.accepted_shift;
        cr.acc_shift = dp > 0 ? static_cast<double>(da) / static_cast<double>(dp) : 0.0;
        const auto rp = fin.proposed_rewire - base.proposed_rewire;
        const auto ra = fin.accepted_rewire - base.accepted_rewire;
        cr.acc_rewire = rp > 0 ? static_cast<double>(ra) / static_cast<double>(rp) : 0.0;
        out.chains.push_back(std::move(cr));
    }

    out.obs.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::vector<Estimate> parts;
        parts.reserve(out.chains.size());
        for (const ChainResult& cr : out.chains) parts.push_back(cr.obs[k]);
        out.obs.push_back(pooled(parts));
    }
    for (const ChainResult& cr : out.chains) out.unconverged = out.unconverged || cr.unconverged;
    return out;
}

std::vector<TiPoint> free_energy_ti(const GibbsSpec& base, const ChargeVector& q,
                                    const std::vector<double>& beta_grid, const McmcOptions& opt) {
    require(!beta_grid.empty(), Errc::config, "free_energy_ti: empty beta grid");
    require(beta_grid.front() == 0.0, Errc::config, "free_energy_ti: grid must start at beta = 0");
    for (std::size_t k = 1; k < beta_grid.size(); ++k)
        require(beta_grid[k] > beta_grid[k - 1], Errc::config, "free_energy_ti: grid must increase");

    const std::size_t m = beta_grid.size();
    std::vector<TiPoint> out(m);
    std::vector<PathObservable> obs{obs_h_over_n2()};
    for (std::size_t k = 0; k < m; ++k) {
        GibbsSpec spec = base;
        spec.beta = beta_grid[k];
        spec.seed = derive_seed(base.seed, 0x7469 + k);  // independent streams per grid point
        McmcResult r = metropolis_run(spec, q, obs, opt);
        out[k].beta = beta_grid[k];
        out[k].dfdb = r.obs[0];
        out[k].unconverged = r.unconverged;
    }

    std::vector<Estimate> dfdb(m);
    for (std::size_t k = 0; k < m; ++k) dfdb[k] = out[k].dfdb;
    std::vector<Estimate> f = ti_integrate(beta_grid, dfdb);
    for (std::size_t k = 0; k < m; ++k) out[k].f = f[k];
    return out;
}

std::vector<Estimate> ti_integrate(const std::vector<double>& grid, const std::vector<Estimate>& dfdb) {
    require(grid.size() == dfdb.size() && !grid.empty(), Errc::precondition,
            "ti_integrate: grid/derivative size mismatch");
    const std::size_t m = grid.size();
    std::vector<Estimate> out(m);
    // trapezoid: F_k = sum_{j<k} (b_{j+1}-b_j)(m_j + m_{j+1})/2; each mean m_j
    // enters F_k with weight (gap_left + gap_right)/2, so the variance is the
    // weighted sum of the per-point variances
    for (std::size_t k = 0; k < m; ++k) {
        double f = 0.0, var = 0.0;
        std::int64_t count = 0;
        double tau = 1.0;
        for (std::size_t j = 1; j <= k; ++j)
            f += 0.5 * (grid[j] - grid[j - 1]) * (dfdb[j - 1].mean + dfdb[j].mean);
        for (std::size_t j = 0; j <= k; ++j) {
            double w = 0.0;
            if (j > 0) w += 0.5 * (grid[j] - grid[j - 1]);
            if (j < k) w += 0.5 * (grid[j + 1] - grid[j]);
            var += w * w * dfdb[j].se * dfdb[j].se;
            count += dfdb[j].n;
            tau = std::max(tau, dfdb[j].tau);
        }
        out[k] = Estimate{f, std::sqrt(var), count, tau, "trapezoid"};
    }
    return out;
}

// ---- observables -----------------------------------------------------------

PathObservable obs_h_over_n2() {
    return [](const PathView& v) { return v.h / (static_cast<double>(v.n) * static_cast<double>(v.n)); };
}

PathObservable obs_lstar_frac() {
    return [](const PathView& v) { return static_cast<double>(v.lstar) / static_cast<double>(v.n); };
}

PathObservable obs_diameter() {
    return [](const PathView& v) { return static_cast<double>(v.diameter()); };
}

PathObservable obs_lstar_ge(double frac) {
    return [frac](const PathView& v) {
        return static_cast<double>(v.lstar) >= frac * static_cast<double>(v.n) ? 1.0 : 0.0;
    };
}

PathObservable obs_diam_ge(std::int64_t l) {
    return [l](const PathView& v) { return v.diameter() >= l ? 1.0 : 0.0; };
}

PathObservable obs_step_is(int monomer, const std::vector<std::int32_t>& site) {
    return [monomer, site](const PathView& v) {
        const std::int32_t* x = v.pos + static_cast<std::ptrdiff_t>(monomer) * v.d;
        for (int k = 0; k < v.d; ++k)
            if (x[k] != site[static_cast<std::size_t>(k)]) return 0.0;
        return 1.0;
    };
}

PathObservable obs_s_alpha(const ChargeVector& q, double alpha) {
    return [q, alpha](const PathView& v) {
        return detect_events(q, v.positions_vec(), v.d, alpha).s_alpha ? 1.0 : 0.0;
    };
}

PathObservable obs_c_alpha(const ChargeVector& q, double alpha) {
    return [q, alpha](const PathView& v) {
        return detect_events(q, v.positions_vec(), v.d, alpha).c_alpha ? 1.0 : 0.0;
    };
}

PathObservable obs_r_alpha(const ChargeVector& q, double alpha) {
    return [q, alpha](const PathView& v) {
        return static_cast<double>(detect_events(q, v.positions_vec(), v.d, alpha).r_alpha);
    };
}

}  // namespace polyq
