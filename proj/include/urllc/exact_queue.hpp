// Exact stationary analysis of the multi-class finite-bandwidth loss system:
// product-form state masses on the feasible set S = {n : h n^T <= W}, per-class
// blocking via PASTA as mass(S_c)/mass(S), and the tall-vs-wide split comparison.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace urllc::exact_queue {

inline constexpr std::int64_t kDefaultStateCap = 10'000'000;

// One traffic class of the loss system. Blocking depends on it only through
// (load, bandwidth); arrival_rate and duration enter solely via their product.
struct LossClass {
    double arrival_rate;  // packets/sec, >= 0
    double bandwidth;     // Hz, > 0
    double duration;      // sec, > 0
    double load() const { return arrival_rate * duration; }
};

// Bandwidths and capacity snapped to a common exact integer grid so that the
// feasibility test h n^T <= W never suffers a floating-point flip.
struct BandwidthGrid {
    std::vector<std::int64_t> weights;  // one per class, >= 1
    std::int64_t capacity = 0;          // >= 0
    double unit = 1.0;                  // Hz per grid tick
};

BandwidthGrid make_bandwidth_grid(std::span<const double> bandwidths, double total_bandwidth);

// Product-form distribution of the infinite-bandwidth system: independent
// Poisson(load_c) occupancy per class.
class InfiniteBandwidthDistribution {
public:
    explicit InfiniteBandwidthDistribution(std::vector<LossClass> classes);
    double marginal_pmf(std::size_t class_index, std::int64_t n) const;
    double mean_utilization() const;       // sum h_c rho_c
    double utilization_variance() const;   // sum h_c^2 rho_c
    const std::vector<LossClass>& classes() const { return classes_; }

private:
    std::vector<LossClass> classes_;
};

struct StateSpaceSummary {
    std::int64_t state_count;                       // |S|
    std::vector<std::int64_t> frontier_counts;      // |S_c| per class
};

struct BlockingReport {
    std::vector<double> per_class_blocking;
    double normalizing_constant;  // G with pi(n) = G * prod rho^n / n!
    std::int64_t state_count;
};

/// Visits every feasible state; `counts` is the occupancy vector, `used` the
/// occupied grid ticks. Throws StateSpaceError when the enumeration bound
/// prod_c (floor(W/h_c) + 1) exceeds `state_cap`.
void for_each_feasible_state(std::span<const LossClass> classes, double total_bandwidth,
                             std::int64_t state_cap,
                             const std::function<void(std::span<const std::int64_t> counts,
                                                      std::int64_t used)>& visit);

StateSpaceSummary enumerate_feasible_states(std::span<const LossClass> classes,
                                            double total_bandwidth,
                                            std::int64_t state_cap = kDefaultStateCap);

/// Exact per-class blocking probabilities (PASTA): truncated product-form mass
/// on the blocking frontier over the mass on S. Accumulation is done in
/// log-space with a max shift; normalization is re-verified to 1e-12.
BlockingReport blocking_probability(std::span<const LossClass> classes, double total_bandwidth,
                                    std::int64_t state_cap = kDefaultStateCap);

/// Erlang-B recursion; closed-form oracle for the single-class case.
double erlang_b(std::int64_t servers, double load);

struct TallWideComparison {
    std::vector<double> blocking_before;
    std::vector<double> blocking_after;
    // Wide-split dominance is guaranteed (for W large enough) only when the
    // split class's load is below one; outside that regime the comparison is
    // reported, not asserted.
    bool split_load_below_one;
};

/// Replaces (h_i, s_i) by (h_i/q, q s_i) -- same arrival rate, load scaled by q --
/// and returns the exact blocking vectors of both systems.
TallWideComparison compare_tall_wide(std::span<const LossClass> classes, double total_bandwidth,
                                     std::size_t split_class, std::int64_t q,
                                     std::int64_t state_cap = kDefaultStateCap);

struct SplitThresholdScan {
    std::vector<double> bandwidth_grid;
    std::vector<bool> dominates;                 // after <= before for every class, per grid point
    std::optional<double> threshold;             // smallest grid W from which dominance persists
    std::vector<std::vector<double>> before;     // per grid point, per class
    std::vector<std::vector<double>> after;
};

/// Scans a bandwidth grid and reports the empirically observed threshold above
/// which the q-split system dominates. The threshold is a grid observation
/// only; no minimality is claimed.
SplitThresholdScan find_split_threshold(std::span<const LossClass> classes,
                                        std::size_t split_class, std::int64_t q,
                                        std::span<const double> bandwidth_grid,
                                        std::int64_t state_cap = kDefaultStateCap);

}  // namespace urllc::exact_queue
