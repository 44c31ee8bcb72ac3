#include "urllc/exact_queue.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "urllc/errors.hpp"

namespace urllc::exact_queue {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Rational {
    std::int64_t num;
    std::int64_t den;
};

// Best rational approximation with bounded denominator via continued fractions.
// Returns nullopt if no denominator <= den_max achieves the relative tolerance.
std::optional<Rational> rationalize(double v, std::int64_t den_max, double rel_tol) {
    if (!(v > 0.0) || !std::isfinite(v)) return std::nullopt;
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double x = v;
    for (int it = 0; it < 64; ++it) {
        const double fa = std::floor(x);
        if (fa > 9e17) return std::nullopt;
        const auto a = static_cast<std::int64_t>(fa);
        const __int128 p2 = static_cast<__int128>(a) * p1 + p0;
        const __int128 q2 = static_cast<__int128>(a) * q1 + q0;
        if (q2 > den_max || p2 > std::numeric_limits<std::int64_t>::max()) break;
        p0 = p1; q0 = q1;
        p1 = static_cast<std::int64_t>(p2);
        q1 = static_cast<std::int64_t>(q2);
        const double approx = static_cast<double>(p1) / static_cast<double>(q1);
        if (std::abs(approx - v) <= rel_tol * v) return Rational{p1, q1};
        const double frac = x - fa;
        if (frac <= 0.0) break;
        x = 1.0 / frac;
    }
    return std::nullopt;
}

// Exact dyadic decomposition of a positive double: v = mant * 2^exp2.
void dyadic(double v, std::int64_t& mant, int& exp2) {
    int e = 0;
    double m = std::frexp(v, &e);  // m in [0.5, 1)
    mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    exp2 = e - 53;
    while (mant % 2 == 0 && mant != 0) { mant /= 2; ++exp2; }
}

std::int64_t checked_scale(std::int64_t num, std::int64_t factor) {
    const __int128 r = static_cast<__int128>(num) * factor;
    if (r > std::numeric_limits<std::int64_t>::max())
        throw ValidationError("bandwidth grid overflow: values span too wide a range for exact enumeration");
    return static_cast<std::int64_t>(r);
}

struct LogSumExp {
    double max_log;
    double sum;   // Kahan-compensated sum of exp(logw - max_log)
    double comp;
    explicit LogSumExp(double max_shift) : max_log(max_shift), sum(0.0), comp(0.0) {}
    void add(double logw) {
        const double term = std::exp(logw - max_log);
        const double y = term - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    double log_value() const { return sum > 0.0 ? max_log + std::log(sum) : -kInf; }
};

struct GridSystem {
    BandwidthGrid grid;
    std::vector<double> log_rho;   // -inf for zero load
    std::vector<std::int64_t> max_count;
};

GridSystem prepare(std::span<const LossClass> classes, double W, std::int64_t state_cap) {
    if (classes.empty()) throw ValidationError("loss system needs at least one class");
    std::vector<double> hs;
    hs.reserve(classes.size());
    for (const auto& c : classes) {
        if (!(c.bandwidth > 0.0)) throw ValidationError("class bandwidth must be > 0");
        if (!(c.duration > 0.0)) throw ValidationError("class duration must be > 0");
        if (!(c.arrival_rate >= 0.0)) throw ValidationError("class arrival rate must be >= 0");
        if (!std::isfinite(c.load())) throw ValidationError("class load must be finite");
        hs.push_back(c.bandwidth);
    }
    if (!(W >= 0.0) || !std::isfinite(W)) throw ValidationError("total bandwidth must be finite and >= 0");

    GridSystem sys{make_bandwidth_grid(hs, W), {}, {}};
    double bound = 1.0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const double rho = classes[c].load();
        sys.log_rho.push_back(rho > 0.0 ? std::log(rho) : -kInf);
        const std::int64_t mc = sys.grid.capacity / sys.grid.weights[c];
        sys.max_count.push_back(mc);
        bound *= static_cast<double>(mc) + 1.0;
    }
    if (bound > static_cast<double>(state_cap))
        throw StateSpaceError(
            "state space bound " + std::to_string(bound) + " exceeds cap " +
            std::to_string(state_cap) + "; use the simulator for this system");
    return sys;
}

// Depth-first walk of S with incremental log-weights (recursion depth = class count).
template <typename Visit>
void walk(const GridSystem& sys, Visit&& visit) {
    const std::size_t C = sys.grid.weights.size();
    std::vector<std::int64_t> counts(C, 0);
    auto rec = [&](auto&& self, std::size_t c, std::int64_t used, double logw) -> void {
        if (c == C) { visit(counts, used, logw); return; }
        const std::int64_t w = sys.grid.weights[c];
        const std::int64_t nmax = (sys.grid.capacity - used) / w;
        double lw = logw;
        for (std::int64_t n = 0; n <= nmax; ++n) {
            counts[c] = n;
            self(self, c + 1, used + n * w, lw);
            lw += sys.log_rho[c] - std::log(static_cast<double>(n + 1));
        }
        counts[c] = 0;
    };
    rec(rec, 0, 0, 0.0);
}

}  // namespace

BandwidthGrid make_bandwidth_grid(std::span<const double> bandwidths, double total_bandwidth) {
    constexpr std::int64_t kDenMax = 1'000'000;
    constexpr double kRelTol = 1e-9;

    std::vector<double> values(bandwidths.begin(), bandwidths.end());
    values.push_back(total_bandwidth);

    // First choice: small-denominator rationals (snaps 0.1, W/3, ... exactly).
    std::vector<Rational> rats;
    bool ok = true;
    for (double v : values) {
        if (v == 0.0) { rats.push_back({0, 1}); continue; }
        auto r = rationalize(v, kDenMax, kRelTol);
        if (!r) { ok = false; break; }
        rats.push_back(*r);
    }
    if (ok) {
        __int128 lcm = 1;
        for (const auto& r : rats) {
            const std::int64_t g = std::gcd(static_cast<std::int64_t>(lcm % r.den), r.den);
            lcm = lcm / g * r.den;
            if (lcm > 1'000'000'000'000LL) { ok = false; break; }
        }
        if (ok) {
            const auto D = static_cast<std::int64_t>(lcm);
            BandwidthGrid grid;
            grid.unit = 1.0 / static_cast<double>(D);
            for (std::size_t i = 0; i + 1 < values.size(); ++i)
                grid.weights.push_back(checked_scale(rats[i].num, D / rats[i].den));
            grid.capacity = checked_scale(rats.back().num, D / rats.back().den);
            for (std::int64_t w : grid.weights)
                if (w <= 0) throw ValidationError("class bandwidth rounds to zero on the common grid");
            return grid;
        }
    }

    // Fallback: exact dyadic scaling of the doubles themselves.
    std::vector<std::int64_t> mants(values.size());
    std::vector<int> exps(values.size());
    int emin = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] == 0.0) { mants[i] = 0; exps[i] = 0; continue; }
        dyadic(values[i], mants[i], exps[i]);
        emin = std::min(emin, exps[i]);
    }
    BandwidthGrid grid;
    grid.unit = std::ldexp(1.0, emin);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const int shift = values[i] == 0.0 ? 0 : exps[i] - emin;
        if (shift > 62) throw ValidationError("bandwidth values span too wide a range for exact enumeration");
        std::int64_t scaled = mants[i];
        for (int s = 0; s < shift; ++s) scaled = checked_scale(scaled, 2);
        if (i + 1 < values.size()) grid.weights.push_back(scaled);
        else grid.capacity = scaled;
    }
    return grid;
}

InfiniteBandwidthDistribution::InfiniteBandwidthDistribution(std::vector<LossClass> classes)
    : classes_(std::move(classes)) {
    for (const auto& c : classes_)
        if (!(c.bandwidth > 0.0 && c.duration > 0.0 && c.arrival_rate >= 0.0 && std::isfinite(c.load())))
            throw ValidationError("invalid loss class");
}

double InfiniteBandwidthDistribution::marginal_pmf(std::size_t class_index, std::int64_t n) const {
    const double rho = classes_.at(class_index).load();
    if (n < 0) return 0.0;
    if (rho == 0.0) return n == 0 ? 1.0 : 0.0;
    const auto nd = static_cast<double>(n);
    return std::exp(nd * std::log(rho) - rho - std::lgamma(nd + 1.0));
}

double InfiniteBandwidthDistribution::mean_utilization() const {
    double s = 0.0;
    for (const auto& c : classes_) s += c.bandwidth * c.load();
    return s;
}

double InfiniteBandwidthDistribution::utilization_variance() const {
    double s = 0.0;
    for (const auto& c : classes_) s += c.bandwidth * c.bandwidth * c.load();
    return s;
}

void for_each_feasible_state(std::span<const LossClass> classes, double total_bandwidth,
                             std::int64_t state_cap,
                             const std::function<void(std::span<const std::int64_t>, std::int64_t)>& visit) {
    const GridSystem sys = prepare(classes, total_bandwidth, state_cap);
    walk(sys, [&](const std::vector<std::int64_t>& counts, std::int64_t used, double) {
        visit(counts, used);
    });
}

StateSpaceSummary enumerate_feasible_states(std::span<const LossClass> classes,
                                            double total_bandwidth, std::int64_t state_cap) {
    const GridSystem sys = prepare(classes, total_bandwidth, state_cap);
    StateSpaceSummary out{0, std::vector<std::int64_t>(classes.size(), 0)};
    walk(sys, [&](const std::vector<std::int64_t>&, std::int64_t used, double) {
        ++out.state_count;
        for (std::size_t c = 0; c < classes.size(); ++c)
            if (used + sys.grid.weights[c] > sys.grid.capacity) ++out.frontier_counts[c];
    });
    return out;
}

BlockingReport blocking_probability(std::span<const LossClass> classes, double total_bandwidth,
                                    std::int64_t state_cap) {
    const GridSystem sys = prepare(classes, total_bandwidth, state_cap);
    const std::size_t C = classes.size();

    // pass 1: max log-weight over S, for a stable shift
    double max_log = -kInf;
    walk(sys, [&](const std::vector<std::int64_t>&, std::int64_t, double logw) {
        max_log = std::max(max_log, logw);
    });
    if (max_log == -kInf) max_log = 0.0;

    // pass 2: shifted mass accumulation for S and every frontier S_c
    LogSumExp total(max_log);
    std::vector<LogSumExp> frontier(C, LogSumExp(max_log));
    std::int64_t states = 0;
    walk(sys, [&](const std::vector<std::int64_t>&, std::int64_t used, double logw) {
        ++states;
        total.add(logw);
        for (std::size_t c = 0; c < C; ++c)
            if (used + sys.grid.weights[c] > sys.grid.capacity) frontier[c].add(logw);
    });

    const double log_mass = total.log_value();

    // pass 3: normalization audit -- masses over S must sum to 1 after dividing by the total
    {
        double sum = 0.0, comp = 0.0;
        walk(sys, [&](const std::vector<std::int64_t>&, std::int64_t, double logw) {
            const double term = std::exp(logw - log_mass);
            const double y = term - comp;
            const double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        });
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::logic_error("product-form normalization drifted beyond 1e-12: " + std::to_string(sum - 1.0));
    }

    BlockingReport report;
    report.state_count = states;
    report.normalizing_constant = std::exp(-log_mass);
    report.per_class_blocking.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        const double lf = frontier[c].log_value();
        report.per_class_blocking[c] = lf == -kInf ? 0.0 : std::exp(lf - log_mass);
    }
    return report;
}

double erlang_b(std::int64_t servers, double load) {
    if (servers < 0) throw ValidationError("erlang_b: servers must be >= 0");
    if (!(load >= 0.0)) throw ValidationError("erlang_b: load must be >= 0");
    double b = 1.0;
    for (std::int64_t k = 1; k <= servers; ++k)
        b = load * b / (static_cast<double>(k) + load * b);
    return b;
}

TallWideComparison compare_tall_wide(std::span<const LossClass> classes, double total_bandwidth,
                                     std::size_t split_class, std::int64_t q, std::int64_t state_cap) {
    if (split_class >= classes.size()) throw ValidationError("split class index out of range");
    if (q < 1) throw ValidationError("split factor q must be a positive integer");

    std::vector<LossClass> wide(classes.begin(), classes.end());
    wide[split_class].bandwidth /= static_cast<double>(q);
    wide[split_class].duration *= static_cast<double>(q);

    TallWideComparison cmp;
    cmp.blocking_before = blocking_probability(classes, total_bandwidth, state_cap).per_class_blocking;
    cmp.blocking_after = blocking_probability(wide, total_bandwidth, state_cap).per_class_blocking;
    cmp.split_load_below_one = classes[split_class].load() < 1.0;
    return cmp;
}

SplitThresholdScan find_split_threshold(std::span<const LossClass> classes,
                                        std::size_t split_class, std::int64_t q,
                                        std::span<const double> bandwidth_grid,
                                        std::int64_t state_cap) {
    SplitThresholdScan scan;
    scan.bandwidth_grid.assign(bandwidth_grid.begin(), bandwidth_grid.end());
    for (double w : bandwidth_grid) {
        const auto cmp = compare_tall_wide(classes, w, split_class, q, state_cap);
        bool dom = true;
        for (std::size_t c = 0; c < cmp.blocking_before.size(); ++c)
            if (cmp.blocking_after[c] > cmp.blocking_before[c] + 1e-12) dom = false;
        scan.dominates.push_back(dom);
        scan.before.push_back(cmp.blocking_before);
        scan.after.push_back(cmp.blocking_after);
    }
    // smallest grid point from which dominance persists through the end of the grid
    std::optional<std::size_t> idx;
    for (std::size_t i = scan.dominates.size(); i-- > 0;) {
        if (!scan.dominates[i]) break;
        idx = i;
    }
    if (idx) scan.threshold = scan.bandwidth_grid[*idx];
    return scan;
}

}  // namespace urllc::exact_queue
