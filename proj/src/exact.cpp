#include "polyq/exact.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "polyq/errors.hpp"
#include "polyq/util.hpp"

namespace polyq {

std::uint64_t total_paths(int d, std::int64_t n_monomers) {
    require(d >= 1 && n_monomers >= 1, Errc::precondition, "total_paths: bad dimension or length");
    std::uint64_t total = 1;
    const std::uint64_t b = 2ull * static_cast<std::uint64_t>(d);
    for (std::int64_t i = 1; i < n_monomers; ++i) {
        require(total <= std::numeric_limits<std::uint64_t>::max() / b, Errc::budget,
                "total_paths: path count exceeds 64 bits");
        total *= b;
    }
    return total;
}

PathIterator::PathIterator(int d, std::int64_t n_monomers)
    : d_(d), n_(n_monomers), count_(total_paths(d, n_monomers)) {}

void PathIterator::seek(std::uint64_t index) {
    require(index <= count_, Errc::precondition, "path iterator: seek past end");
    idx_ = index;
}

bool PathIterator::next(Walk& out) {
    if (idx_ >= count_) return false;
    std::vector<Step> st(static_cast<std::size_t>(n_ - 1));
    std::uint64_t rem = idx_;
    const std::uint64_t b = 2ull * static_cast<std::uint64_t>(d_);
    for (std::int64_t j = n_ - 2; j >= 0; --j) {
        st[static_cast<std::size_t>(j)] = step_from_code(static_cast<int>(rem % b));
        rem /= b;
    }
    out = Walk(d_, std::move(st));
    ++idx_;
    return true;
}

std::int64_t PathView::diameter() const { return diameter_l1(pos, n, d); }

namespace {

// Depth-first odometer over step codes with an incrementally maintained
// occupation field on a dense grid of side 2N-1 per axis (every reachable
// site has all coordinates in [-(N-1), N-1]).  Push/pop update H via
// dH = q (2 Q_before + q) and the max local time via a histogram, both O(1).
class Engine {
public:
    Engine(int d, std::int64_t n, const double* q)
        : d_(d), n_(n), q_(q), side_(2 * n - 1), shift_(n - 1) {
        std::int64_t cells = 1;
        for (int k = 0; k < d; ++k) {
            require(cells <= (std::int64_t{1} << 28) / side_, Errc::budget, "enumeration grid too large");
            cells *= side_;
        }
        cells_ = cells;
        strides_.resize(static_cast<std::size_t>(d));
        std::int64_t s = 1;
        for (int k = 0; k < d; ++k) {
            strides_[static_cast<std::size_t>(k)] = s;
            s *= side_;
        }
        field_q_.assign(static_cast<std::size_t>(cells_), 0.0);
        field_l_.assign(static_cast<std::size_t>(cells_), 0);
        cnt_.assign(static_cast<std::size_t>(n_ + 1), 0);
        pos_.assign(static_cast<std::size_t>(n_ * d_), 0);
        cell_stack_.assign(static_cast<std::size_t>(n_), 0);
        codes_.assign(n_ > 1 ? static_cast<std::size_t>(n_ - 1) : 0, 0);
    }

    int dim() const { return d_; }
    std::int64_t monomers() const { return n_; }
    std::int64_t cells() const { return cells_; }
    double h() const { return h_; }
    std::int64_t lstar() const { return lstar_; }
    const std::vector<int>& codes() const { return codes_; }
    int code_before(std::int64_t i) const { return codes_[static_cast<std::size_t>(i - 1)]; }
    std::int64_t endpoint_cell() const { return cell_stack_[static_cast<std::size_t>(n_ - 1)]; }
    std::int32_t local_time_at(std::int64_t i) const {
        return field_l_[static_cast<std::size_t>(cell_stack_[static_cast<std::size_t>(i)])];
    }
    PathView view() const { return PathView{d_, n_, pos_.data(), h_, lstar_}; }

    void unpack_cell(std::int64_t cell, std::int32_t* out) const {
        for (int k = 0; k < d_; ++k) {
            out[k] = static_cast<std::int32_t>(cell % side_ - shift_);
            cell /= side_;
        }
    }

    // enumerate leaves [lo, hi) in odometer order
    template <class Policy>
    void run_range(std::uint64_t lo, std::uint64_t hi, Policy& pol) {
        if (lo >= hi) return;
        reset();
        pol.on_start(*this);
        const std::uint64_t b = 2ull * static_cast<std::uint64_t>(d_);
        if (n_ > 1) {
            std::uint64_t rem = lo;
            for (std::int64_t j = n_ - 2; j >= 0; --j) {
                codes_[static_cast<std::size_t>(j)] = static_cast<int>(rem % b);
                rem /= b;
            }
            for (std::int64_t i = 1; i < n_; ++i) {
                push(i);
                pol.on_push(*this, i);
            }
        }
        std::uint64_t idx = lo;
        for (;;) {
            if (!pol.on_leaf(*this)) return;
            if (++idx >= hi) return;
            std::int64_t j = n_ - 2;
            for (;;) {
                pol.on_pop(*this, j + 1);
                pop(j + 1);
                if (codes_[static_cast<std::size_t>(j)] + 1 < static_cast<int>(b)) break;
                codes_[static_cast<std::size_t>(j)] = 0;
                --j;
            }
            ++codes_[static_cast<std::size_t>(j)];
            for (std::int64_t k = j; k <= n_ - 2; ++k) {
                push(k + 1);
                pol.on_push(*this, k + 1);
            }
        }
    }

private:
    void reset() {
        std::fill(field_q_.begin(), field_q_.end(), 0.0);
        std::fill(field_l_.begin(), field_l_.end(), 0);
        std::fill(cnt_.begin(), cnt_.end(), 0);
        std::fill(pos_.begin(), pos_.begin() + d_, 0);
        std::int64_t c0 = 0;
        for (int k = 0; k < d_; ++k) c0 += strides_[static_cast<std::size_t>(k)] * shift_;
        cell_stack_[0] = c0;
        const double q0 = q_[0];
        h_ = q0 * q0;
        field_q_[static_cast<std::size_t>(c0)] = q0;
        field_l_[static_cast<std::size_t>(c0)] = 1;
        cnt_[1] = 1;
        lstar_ = 1;
    }

    void push(std::int64_t i) {
        const int code = codes_[static_cast<std::size_t>(i - 1)];
        const int axis = code >> 1;
        const std::int32_t dir = (code & 1) ? -1 : +1;
        const std::int32_t* prev = &pos_[static_cast<std::size_t>((i - 1) * d_)];
        std::int32_t* cur = &pos_[static_cast<std::size_t>(i * d_)];
        for (int k = 0; k < d_; ++k) cur[k] = prev[k];
        cur[axis] += dir;
        const std::int64_t c = cell_stack_[static_cast<std::size_t>(i)] =
            cell_stack_[static_cast<std::size_t>(i - 1)] + dir * strides_[static_cast<std::size_t>(axis)];
        const double qi = q_[i];
        h_ += qi * (2.0 * field_q_[static_cast<std::size_t>(c)] + qi);
        field_q_[static_cast<std::size_t>(c)] += qi;
        const std::int32_t l = ++field_l_[static_cast<std::size_t>(c)];
        if (l > 1) --cnt_[static_cast<std::size_t>(l - 1)];
        ++cnt_[static_cast<std::size_t>(l)];
        if (l > lstar_) lstar_ = l;
    }

    void pop(std::int64_t i) {
        const std::int64_t c = cell_stack_[static_cast<std::size_t>(i)];
        const double qi = q_[i];
        field_q_[static_cast<std::size_t>(c)] -= qi;
        h_ -= qi * (2.0 * field_q_[static_cast<std::size_t>(c)] + qi);
        const std::int32_t l = field_l_[static_cast<std::size_t>(c)]--;
        --cnt_[static_cast<std::size_t>(l)];
        if (l > 1) ++cnt_[static_cast<std::size_t>(l - 1)];
        if (l == lstar_ && cnt_[static_cast<std::size_t>(l)] == 0) lstar_ = l - 1;
        // kill float residue so revisits of an emptied site start clean
        if (field_l_[static_cast<std::size_t>(c)] == 0) field_q_[static_cast<std::size_t>(c)] = 0.0;
    }

    int d_;
    std::int64_t n_;
    const double* q_;
    std::int64_t side_, shift_, cells_ = 0;
    std::vector<std::int64_t> strides_;
    std::vector<double> field_q_;
    std::vector<std::int32_t> field_l_;
    std::vector<std::int32_t> cnt_;  // cnt_[l] = #sites with local time l
    std::vector<std::int32_t> pos_;
    std::vector<std::int64_t> cell_stack_;
    std::vector<int> codes_;
    double h_ = 0.0;
    std::int64_t lstar_ = 0;
};

struct NoHooks {
    void on_start(Engine&) {}
    void on_push(Engine&, std::int64_t) {}
    void on_pop(Engine&, std::int64_t) {}
};

std::uint64_t checked_total(int d, std::int64_t n, const EnumLimits& lim) {
    std::uint64_t total = total_paths(d, n);
    require(total <= lim.budget, Errc::budget, "enumeration exceeds the path budget");
    return total;
}

// shard size: a power of 2d dividing total, near the target subtree size
std::uint64_t plan_chunk(int d, std::int64_t n, std::uint64_t total, std::uint64_t target) {
    std::uint64_t chunk = total;
    std::int64_t depth = 0;
    while (chunk > target && depth < n - 1) {
        chunk /= 2ull * static_cast<std::uint64_t>(d);
        ++depth;
    }
    return chunk;
}

// Run one policy instance per shard over the whole path space.  Shard
// boundaries and the merge order depend only on (d, n, target), never on the
// thread count, so every reduction is reproducible.
template <class Policy>
void run_sharded(int d, std::int64_t n, const double* q, const EnumLimits& lim, std::uint64_t total,
                 std::vector<Policy>& pols, std::uint64_t chunk, std::atomic<bool>& stop) {
    const std::uint64_t nshards = pols.size();
    std::atomic<std::uint64_t> next{0};
    int want = lim.threads >= 1 ? lim.threads : thread_budget();
    if (static_cast<std::uint64_t>(want) > nshards) want = static_cast<int>(nshards);
    auto work = [&]() {
        Engine eng(d, n, q);
        for (;;) {
            const std::uint64_t s = next.fetch_add(1);
            if (s >= nshards || stop.load(std::memory_order_relaxed)) break;
            const std::uint64_t lo = s * chunk;
            eng.run_range(lo, std::min(total, lo + chunk), pols[static_cast<std::size_t>(s)]);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < want; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
}

template <class Policy>
std::vector<Policy> run_all(int d, std::int64_t n, const double* q, const EnumLimits& lim,
                            std::uint64_t total, const Policy& proto,
                            std::uint64_t target = 1ull << 16) {
    const std::uint64_t chunk = plan_chunk(d, n, total, target);
    std::vector<Policy> pols((total + chunk - 1) / chunk, proto);
    std::atomic<bool> stop{false};
    for (auto& p : pols) p.stop = &stop;
    run_sharded(d, n, q, lim, total, pols, chunk, stop);
    return pols;
}

struct MaxPolicy : NoHooks {
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_codes;
    std::uint64_t count = 0;
    std::atomic<bool>* stop = nullptr;
    bool on_leaf(Engine& e) {
        if (e.h() > best) {
            best = e.h();
            best_codes = e.codes();
            count = 1;
        } else if (e.h() == best) {
            ++count;
        }
        return true;
    }
};

// weights exp(beta (H - h_ref)/N) times, when tilted, the product of step
// probabilities; optionally restricted to L* <= lstar_cap and extended with
// weighted observable sums
struct WeightPolicy : NoHooks {
    double beta_over_n = 0.0;
    double h_ref = 0.0;
    const double* step_lp = nullptr;  // 2d entries, log of tilted step law
    std::int64_t lstar_cap = -1;
    const std::vector<PathObservable>* obs = nullptr;
    double lp = 0.0;
    Kahan z;
    std::vector<Kahan> osum;
    std::atomic<bool>* stop = nullptr;

    void on_start(Engine&) {
        lp = 0.0;
        if (obs) osum.assign(obs->size(), Kahan{});
    }
    void on_push(Engine& e, std::int64_t i) {
        if (step_lp) lp += step_lp[e.code_before(i)];
    }
    void on_pop(Engine& e, std::int64_t i) {
        if (step_lp) lp -= step_lp[e.code_before(i)];
    }
    bool on_leaf(Engine& e) {
        if (lstar_cap >= 0 && e.lstar() > lstar_cap) return true;
        const double w = std::exp(beta_over_n * (e.h() - h_ref) + lp);
        z.add(w);
        if (obs) {
            const PathView v = e.view();
            for (std::size_t k = 0; k < obs->size(); ++k) osum[k].add(w * (*obs)[k](v));
        }
        return true;
    }
};

struct TvPolicy : NoHooks {
    double beta_over_n = 0.0;
    double h_ref = 0.0;
    double log_s = 0.0;  // log of the shifted weight sum over all paths
    double u = 0.0;      // uniform leaf probability
    Kahan acc;
    std::atomic<bool>* stop = nullptr;
    bool on_leaf(Engine& e) {
        acc.add(std::abs(std::exp(beta_over_n * (e.h() - h_ref) - log_s) - u));
        return true;
    }
};

struct EndpointPolicy : NoHooks {
    double beta_over_n = 0.0;
    double h_ref = 0.0;
    const double* step_lp = nullptr;
    double lp = 0.0;
    Kahan z;
    std::vector<double> acc;
    std::atomic<bool>* stop = nullptr;
    void on_start(Engine& e) {
        lp = 0.0;
        acc.assign(static_cast<std::size_t>(e.cells()), 0.0);
    }
    void on_push(Engine& e, std::int64_t i) {
        if (step_lp) lp += step_lp[e.code_before(i)];
    }
    void on_pop(Engine& e, std::int64_t i) {
        if (step_lp) lp -= step_lp[e.code_before(i)];
    }
    bool on_leaf(Engine& e) {
        const double w = std::exp(beta_over_n * (e.h() - h_ref) + lp);
        z.add(w);
        acc[static_cast<std::size_t>(e.endpoint_cell())] += w;
        return true;
    }
};

struct AnnealedPolicy : NoHooks {
    const double* table = nullptr;  // table[l] = log(1 - 2 beta l / n), l <= good_max
    std::int64_t good_max = 0;
    double logsum = 0.0;
    std::int64_t bad = 0;
    Kahan sum;
    bool infinite = false;
    std::atomic<bool>* stop = nullptr;

    void level_add(std::int64_t l) {
        if (l <= good_max)
            logsum += table[l];
        else
            ++bad;
    }
    void level_sub(std::int64_t l) {
        if (l <= good_max)
            logsum -= table[l];
        else
            --bad;
    }
    void on_start(Engine&) {
        logsum = 0.0;
        bad = 0;
        level_add(1);  // monomer 0 sits at the origin with local time 1
    }
    void on_push(Engine& e, std::int64_t i) {
        const std::int64_t l = e.local_time_at(i);
        if (l > 1) level_sub(l - 1);
        level_add(l);
    }
    void on_pop(Engine& e, std::int64_t i) {
        const std::int64_t l = e.local_time_at(i);
        level_sub(l);
        if (l > 1) level_add(l - 1);
    }
    bool on_leaf(Engine&) {
        if (bad > 0) {
            infinite = true;
            if (stop) stop->store(true, std::memory_order_relaxed);
            return false;
        }
        sum.add(std::exp(-0.5 * logsum));
        return true;
    }
};

// H <= min((sum |q|)^2, L*_max sum q^2); switch to shifted weights when the
// raw exponent could overflow
bool needs_shift(const GibbsSpec& spec, const ChargeVector& q) {
    if (spec.beta <= 0.0) return false;
    double sum_abs = 0.0, sum_sq = 0.0;
    for (double v : q.q) {
        sum_abs += std::abs(v);
        sum_sq += v * v;
    }
    const double lstar_max = static_cast<double>((spec.n + 1) / 2);
    const double bound = std::min(sum_abs * sum_abs, lstar_max * sum_sq);
    return spec.beta * bound / static_cast<double>(spec.n) > 500.0;
}

double find_max_h(const GibbsSpec& spec, const ChargeVector& q, const EnumLimits& lim,
                  std::uint64_t total) {
    auto pols = run_all(spec.d, spec.n, q.q.data(), lim, total, MaxPolicy{});
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : pols) best = std::max(best, p.best);
    return best;
}

std::vector<double> tilt_log_probs(const GibbsSpec& spec) {
    double m = 0.0;  // E exp(lambda . S_1) = (1/d) sum_j cosh lambda_j
    for (int k = 0; k < spec.d; ++k) m += std::cosh(spec.pull_at(k));
    m /= spec.d;
    std::vector<double> lp(static_cast<std::size_t>(2 * spec.d));
    const double log_norm = std::log(2.0 * spec.d * m);
    for (int code = 0; code < 2 * spec.d; ++code) {
        const double lam = spec.pull_at(code >> 1);
        lp[static_cast<std::size_t>(code)] = ((code & 1) ? -lam : lam) - log_norm;
    }
    return lp;
}

PartitionResult weighted_partition(const GibbsSpec& spec, const ChargeVector& q,
                                   const EnumLimits& lim, std::int64_t lstar_cap, bool tilted) {
    spec.validate();
    require(static_cast<std::int64_t>(q.q.size()) == spec.n, Errc::precondition,
            "partition: charge count must match N");
    const std::uint64_t total = checked_total(spec.d, spec.n, lim);

    PartitionResult out;
    if (needs_shift(spec, q)) {
        out.max_h = find_max_h(spec, q, lim, total);
        out.h_ref = out.max_h;
        out.shifted = true;
    }

    std::vector<double> lp;
    WeightPolicy proto;
    proto.beta_over_n = spec.beta / static_cast<double>(spec.n);
    proto.h_ref = out.h_ref;
    proto.lstar_cap = lstar_cap;
    if (tilted) {
        lp = tilt_log_probs(spec);
        proto.step_lp = lp.data();
    }
    auto pols = run_all(spec.d, spec.n, q.q.data(), lim, total, proto);

    Kahan z;
    for (const auto& p : pols) z.add(p.z.get());
    const double base = tilted ? 0.0 : -static_cast<double>(spec.n - 1) * std::log(2.0 * spec.d);
    out.log_z = std::log(z.get()) + proto.beta_over_n * out.h_ref + base;
    out.z = std::exp(out.log_z);
    return out;
}

}  // namespace

PartitionResult quenched_partition(const GibbsSpec& spec, const ChargeVector& q, const EnumLimits& lim) {
    return weighted_partition(spec, q, lim, -1, false);
}

PartitionResult truncated_partition(const GibbsSpec& spec, const ChargeVector& q, double eps,
                                    const EnumLimits& lim) {
    require(eps > 0.0, Errc::precondition, "truncated partition: eps must be positive");
    const auto cap = static_cast<std::int64_t>(std::floor(eps * static_cast<double>(spec.n) + 1e-9));
    require(cap >= 1, Errc::precondition, "truncated partition: eps N below one visit is empty");
    return weighted_partition(spec, q, lim, cap, false);
}

PartitionResult tilted_partition(const GibbsSpec& spec, const ChargeVector& q, const EnumLimits& lim) {
    if (!spec.pulled()) return quenched_partition(spec, q, lim);
    return weighted_partition(spec, q, lim, -1, true);
}

std::vector<double> gibbs_expectations(const GibbsSpec& spec, const ChargeVector& q,
                                       const std::vector<PathObservable>& obs, const EnumLimits& lim) {
    spec.validate();
    require(static_cast<std::int64_t>(q.q.size()) == spec.n, Errc::precondition,
            "expectation: charge count must match N");
    const std::uint64_t total = checked_total(spec.d, spec.n, lim);

    WeightPolicy proto;
    proto.beta_over_n = spec.beta / static_cast<double>(spec.n);
    if (needs_shift(spec, q)) proto.h_ref = find_max_h(spec, q, lim, total);
    std::vector<double> lp;
    if (spec.pulled()) {
        lp = tilt_log_probs(spec);
        proto.step_lp = lp.data();
    }
    proto.obs = &obs;
    auto pols = run_all(spec.d, spec.n, q.q.data(), lim, total, proto);

    Kahan z;
    std::vector<Kahan> num(obs.size());
    for (const auto& p : pols) {
        z.add(p.z.get());
        for (std::size_t k = 0; k < obs.size(); ++k) num[k].add(p.osum[k].get());
    }
    const double zv = z.get();
    require(zv > 0.0, Errc::numeric, "expectation: zero partition sum");
    std::vector<double> out(obs.size());
    for (std::size_t k = 0; k < obs.size(); ++k) out[k] = num[k].get() / zv;
    return out;
}

double gibbs_expectation(const GibbsSpec& spec, const ChargeVector& q, const PathObservable& obs,
                         const EnumLimits& lim) {
    return gibbs_expectations(spec, q, {obs}, lim)[0];
}

double tv_distance(const GibbsSpec& spec, const ChargeVector& q, const EnumLimits& lim) {
    const PartitionResult part = quenched_partition(spec, q, lim);
    const std::uint64_t total = checked_total(spec.d, spec.n, lim);

    TvPolicy proto;
    proto.beta_over_n = spec.beta / static_cast<double>(spec.n);
    proto.h_ref = part.h_ref;
    proto.log_s = part.log_z + static_cast<double>(spec.n - 1) * std::log(2.0 * spec.d) -
                  proto.beta_over_n * part.h_ref;
    proto.u = 1.0 / static_cast<double>(total);
    auto pols = run_all(spec.d, spec.n, q.q.data(), lim, total, proto);

    Kahan acc;
    for (const auto& p : pols) acc.add(p.acc.get());
    return 0.5 * acc.get();
}

AnnealedResult annealed_partition_gaussian(int d, std::int64_t n, double beta, const EnumLimits& lim) {
    require(beta >= 0.0, Errc::precondition, "annealed partition: beta must be >= 0");
    const std::uint64_t total = checked_total(d, n, lim);

    std::vector<double> table(static_cast<std::size_t>(n + 1), 0.0);
    std::int64_t good_max = 0;
    for (std::int64_t l = 1; l <= n; ++l) {
        const double f = 1.0 - 2.0 * beta * static_cast<double>(l) / static_cast<double>(n);
        if (f > 0.0) {
            table[static_cast<std::size_t>(l)] = std::log(f);
            good_max = l;
        } else {
            break;
        }
    }

    AnnealedPolicy proto;
    proto.table = table.data();
    proto.good_max = good_max;
    const std::vector<double> zero_q(static_cast<std::size_t>(n), 0.0);
    auto pols = run_all(d, n, zero_q.data(), lim, total, proto);

    for (const auto& p : pols)
        if (p.infinite) return {std::numeric_limits<double>::infinity(), true};
    Kahan sum;
    for (const auto& p : pols) sum.add(p.sum.get());
    return {sum.get() / static_cast<double>(total), false};
}

MaxEnergyResult brute_max_energy(const ChargeVector& q, int d, const EnumLimits& lim) {
    const auto n = static_cast<std::int64_t>(q.q.size());
    require(n >= 1, Errc::precondition, "max energy: empty charge vector");
    const std::uint64_t total = checked_total(d, n, lim);

    auto pols = run_all(d, n, q.q.data(), lim, total, MaxPolicy{});
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& p : pols) best = std::max(best, p.best);
    std::uint64_t count = 0;
    const std::vector<int>* codes = nullptr;
    for (const auto& p : pols) {
        if (p.best == best) {
            count += p.count;
            if (!codes) codes = &p.best_codes;  // first shard: lex-smallest argmax
        }
    }
    std::vector<Step> st(codes->size());
    for (std::size_t j = 0; j < st.size(); ++j) st[j] = step_from_code((*codes)[j]);
    return {best, Walk(d, std::move(st)), count};
}

std::vector<std::pair<std::vector<std::int32_t>, double>> endpoint_law(const GibbsSpec& spec,
                                                                       const ChargeVector& q,
                                                                       const EnumLimits& lim) {
    spec.validate();
    require(static_cast<std::int64_t>(q.q.size()) == spec.n, Errc::precondition,
            "endpoint law: charge count must match N");
    const std::uint64_t total = checked_total(spec.d, spec.n, lim);

    EndpointPolicy proto;
    proto.beta_over_n = spec.beta / static_cast<double>(spec.n);
    if (needs_shift(spec, q)) proto.h_ref = find_max_h(spec, q, lim, total);
    std::vector<double> lp;
    if (spec.pulled()) {
        lp = tilt_log_probs(spec);
        proto.step_lp = lp.data();
    }
    // fewer, larger shards: each policy carries a dense endpoint histogram
    auto pols = run_all(spec.d, spec.n, q.q.data(), lim, total, proto,
                        std::max<std::uint64_t>(1ull << 16, total / 64));

    Engine probe(spec.d, spec.n, q.q.data());
    std::vector<double> acc(static_cast<std::size_t>(probe.cells()), 0.0);
    Kahan z;
    for (const auto& p : pols) {
        z.add(p.z.get());
        for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += p.acc[c];
    }
    const double zv = z.get();
    require(zv > 0.0, Errc::numeric, "endpoint law: zero partition sum");

    std::vector<std::pair<std::vector<std::int32_t>, double>> out;
    std::vector<std::int32_t> x(static_cast<std::size_t>(spec.d));
    for (std::size_t c = 0; c < acc.size(); ++c) {
        if (acc[c] <= 0.0) continue;
        probe.unpack_cell(static_cast<std::int64_t>(c), x.data());
        out.emplace_back(x, acc[c] / zv);
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

ExactGibbs ExactGibbs::compute(const GibbsSpec& spec, const EnumLimits& lim) {
    spec.validate();
    ExactGibbs g{spec, spec.draw_charges(), {}};
    g.z = tilted_partition(spec, g.q, lim);
    return g;
}

double ExactGibbs::expectation(const PathObservable& obs, const EnumLimits& lim) const {
    return gibbs_expectation(spec, q, obs, lim);
}

}  // namespace polyq
