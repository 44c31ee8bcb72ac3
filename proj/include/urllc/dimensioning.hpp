// Square-root-staffing bandwidth rules (one-shot and HARQ), single-class
// capacity inversion, and capacity scaling curves.
#pragma once

#include <span>
#include <vector>

#include "urllc/system_model.hpp"

namespace urllc::dimensioning {

struct StaffingResult {
    double mean_utilization = 0.0;     // Hz
    double utilization_variance = 0.0; // Hz^2
    double required_bandwidth = 0.0;   // mean + c(delta) * sqrt(variance)
    double safety_coefficient = 0.0;   // c(delta) = Q^-1(delta)
};

// One class of the one-shot rule: arrival rate, blocklength, transmission time.
struct OneShotClassLoad {
    double arrival_rate; // packets/sec
    double blocklength;  // channel uses
    double duration;     // sec (the rule's optimal choice is duration = deadline)
};

/// W >= sum lambda r / kappa + c(delta) sqrt(sum lambda r^2 / (kappa^2 s));
/// returns the binding value. Throws std::domain_error for delta outside (0,1).
StaffingResult one_shot_staffing(std::span<const OneShotClassLoad> classes, double delta,
                                 double kappa);

/// Multi-stage extension: per class, stage m contributes its load weighted by
/// the probability p^(m-1) that it is reached. Reduces exactly to
/// one_shot_staffing when every scheme has one stage.
StaffingResult harq_staffing(const SystemConfig& system, double delta);

struct CapacityResult {
    double lambda_star = 0.0; // packets/sec
    bool feasible = true;     // false when kappa*W*deadline < blocklength
};

/// Largest single-class arrival rate whose one-shot staffing requirement equals
/// W: the positive root of kappa W = lambda r + c(delta) r sqrt(lambda/d).
/// The blocklength is derived from the class QoS (failure target reliability_eps).
CapacityResult single_class_capacity(double bandwidth, const TrafficClass& cls, double kappa);

enum class SweepVariable { bandwidth, sinr, deadline, reliability };

struct ScalingPoint {
    double x = 0.0;
    double lambda_star = 0.0;
    double diagnostic_ratio = 0.0; // lambda* over the predicted scaling shape at x
    bool feasible = true;
};

/// Evaluates lambda*(x) along a sweep of one variable, all else taken from the
/// template class; diagnostic_ratio tracks the scaling law for that variable
/// (x for W, log2 x for SINR, a - b/sqrt(x) shape for d, 1/(-log2 x) for delta).
std::vector<ScalingPoint> scaling_curves(const TrafficClass& tmpl, double bandwidth, double kappa,
                                         SweepVariable variable, std::span<const double> grid);

}  // namespace urllc::dimensioning
