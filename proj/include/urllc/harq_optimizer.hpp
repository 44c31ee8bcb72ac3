// Repetition-coding HARQ optimization in the variance- and mean-dominated
// regimes: per stage-count m the regime objective is minimized over the real
// blocklength subject to p(r)^m <= reliability target; the winning scheme is
// materialized with integer channel uses.
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "urllc/channel.hpp"
#include "urllc/system_model.hpp"

namespace urllc::harq_optimizer {

enum class Regime { variance_dominated, mean_dominated };

struct RegimeObjective {
    Regime regime = Regime::variance_dominated;
    double value = 0.0;  // Hz^2 (variance) or Hz (mean) of bandwidth utilization
};

// One stage-count candidate, with the analytic (real-blocklength) optimum.
struct PerMRow {
    int stages = 0;
    double blocklength = 0.0;        // real-valued optimum for this m
    double stage_duration = 0.0;     // d/m - f
    double stage_bandwidth = 0.0;    // blocklength / (kappa * duration)
    double stage_failure_prob = 0.0;
    double objective = 0.0;
    bool feasible = false;
    std::string infeasible_reason;
};

struct OptimizationResult {
    HarqScheme best_scheme;          // integer blocklength, round-up materialization
    RegimeObjective objective;       // analytic optimum value (per unit arrival rate)
    std::vector<PerMRow> per_m_table;
};

/// Smallest integer blocklength whose decode-failure probability is <= per_stage_p.
long long minimal_blocklength_for_stage_target(const channel::LinkSpec& link, double per_stage_p);

/// Regime objective of a concrete scheme: (lambda/kappa^2)(r^2/s) G or
/// (lambda/kappa) r G with G = sum_{j=0}^{m-1} p^j, the expected number of
/// transmissions. `include_final_term` switches to the (m+1)-term sum that
/// also weighs the final decode failure.
RegimeObjective objective_for_scheme(const HarqScheme& scheme, Regime regime, double lambda,
                                     double kappa, bool include_final_term = false);

/// Exhaustive search over m in 1..m_max with per-stage duration d/m - f; rows
/// with nonpositive duration or bandwidth above W are infeasible. Tie objectives
/// (within 1e-9 relative) prefer fewer stages. Throws InfeasibilityError listing
/// the binding constraint per m when nothing is feasible.
OptimizationResult optimize(const TrafficClass& cls, Regime regime, double bandwidth, double kappa,
                            int m_max = 8);

/// Per-m objective table scaled by the class arrival rate, for plotting.
std::vector<PerMRow> sweep_table(const TrafficClass& cls, Regime regime, double lambda,
                                 double kappa, int m_max = 8,
                                 double bandwidth = std::numeric_limits<double>::infinity());

}  // namespace urllc::harq_optimizer
