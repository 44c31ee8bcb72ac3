#include "urllc/dimensioning.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "urllc/channel.hpp"
#include "urllc/errors.hpp"

namespace urllc::dimensioning {

namespace {

double safety_coefficient(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("staffing target delta must be in (0, 1)");
    return channel::q_inverse(delta);
}

}  // namespace

StaffingResult one_shot_staffing(std::span<const OneShotClassLoad> classes, double delta,
                                 double kappa) {
    if (!(kappa > 0.0)) throw ValidationError("kappa must be > 0");
    StaffingResult out;
    out.safety_coefficient = safety_coefficient(delta);
    for (const auto& c : classes) {
        if (!(c.arrival_rate >= 0.0 && c.blocklength > 0.0 && c.duration > 0.0))
            throw ValidationError("one_shot_staffing: rates must be >= 0, blocklength and duration > 0");
        // same expression shape as the harq_staffing one-stage path so the
        // m = 1 reduction is bit-exact
        out.mean_utilization += c.arrival_rate * c.blocklength / kappa;
        out.utilization_variance +=
            c.arrival_rate * (c.blocklength * c.blocklength / c.duration) / (kappa * kappa);
    }
    out.required_bandwidth =
        out.mean_utilization + out.safety_coefficient * std::sqrt(out.utilization_variance);
    return out;
}

StaffingResult harq_staffing(const SystemConfig& system, double delta) {
    const double kappa = system.channel_use_density;
    if (!(kappa > 0.0)) throw ValidationError("kappa must be > 0");

    StaffingResult out;
    out.safety_coefficient = safety_coefficient(delta);
    for (std::size_t i = 0; i < system.classes.size(); ++i) {
        const auto& cc = system.classes[i];
        const auto& s = cc.scheme;
        const double budget = s.stages * (s.duration + cc.traffic.feedback_delay);
        if (budget > cc.traffic.deadline * (1.0 + 1e-12))
            throw ValidationError(class_label(cc, i) + ": scheme transmission+feedback budget " +
                                  std::to_string(budget) + " s exceeds deadline " +
                                  std::to_string(cc.traffic.deadline) + " s");
        if (!(s.duration > 0.0) || !(s.blocklength > 0.0) || s.stages < 1)
            throw ValidationError(class_label(cc, i) + ": invalid scheme");

        // stage m is reached with probability p^(m-1); accumulate
        // r_1 + sum_{m>=2} p^(m-1) r_m and its r^2/s counterpart term by term
        double reach = 1.0;
        double mean_uses = 0.0;
        double var_uses = 0.0;
        for (int m = 1; m <= s.stages; ++m) {
            mean_uses += reach * s.blocklength;
            var_uses += reach * s.blocklength * s.blocklength / s.duration;
            reach *= s.stage_failure_prob;
        }
        out.mean_utilization += cc.traffic.arrival_rate * mean_uses / kappa;
        out.utilization_variance += cc.traffic.arrival_rate * var_uses / (kappa * kappa);
    }
    out.required_bandwidth =
        out.mean_utilization + out.safety_coefficient * std::sqrt(out.utilization_variance);
    return out;
}

CapacityResult single_class_capacity(double bandwidth, const TrafficClass& cls, double kappa) {
    if (!(bandwidth > 0.0)) throw ValidationError("bandwidth must be > 0");
    if (!(kappa > 0.0)) throw ValidationError("kappa must be > 0");
    const double r = channel::blocklength_for_reliability(
        {cls.sinr_linear, cls.payload_bits}, cls.reliability_eps);
    const double d = cls.deadline;
    if (!(d > 0.0)) throw ValidationError("deadline must be > 0");

    CapacityResult out;
    if (kappa * bandwidth * d < r) {  // a single packet cannot fit
        out.lambda_star = 0.0;
        out.feasible = false;
        return out;
    }
    const double c = channel::q_inverse(cls.reliability_eps);
    const double a = kappa * bandwidth / r;
    const double b = c / std::sqrt(d);
    // positive root of r x^2 + c r x / sqrt(d) = kappa W with x = sqrt(lambda);
    // rationalized to avoid cancellation when 4a << b^2
    double x;
    if (b >= 0.0) {
        x = 2.0 * a / (std::sqrt(b * b + 4.0 * a) + b);
    } else {
        x = 0.5 * (-b + std::sqrt(b * b + 4.0 * a));
    }
    out.lambda_star = x * x;
    return out;
}

std::vector<ScalingPoint> scaling_curves(const TrafficClass& tmpl, double bandwidth, double kappa,
                                         SweepVariable variable, std::span<const double> grid) {
    double prev = -std::numeric_limits<double>::infinity();
    for (double g : grid) {
        if (!(g > prev)) throw ValidationError("sweep grid must be strictly increasing");
        prev = g;
    }

    std::vector<ScalingPoint> curve;
    curve.reserve(grid.size());
    for (double x : grid) {
        TrafficClass cls = tmpl;
        double w = bandwidth;
        switch (variable) {
            case SweepVariable::bandwidth: w = x; break;
            case SweepVariable::sinr: cls.sinr_linear = x; break;
            case SweepVariable::deadline: cls.deadline = x; break;
            case SweepVariable::reliability: cls.reliability_eps = x; break;
        }
        const auto cap = single_class_capacity(w, cls, kappa);

        ScalingPoint pt;
        pt.x = x;
        pt.lambda_star = cap.lambda_star;
        pt.feasible = cap.feasible;
        switch (variable) {
            case SweepVariable::bandwidth:
                pt.diagnostic_ratio = cap.lambda_star / x;
                break;
            case SweepVariable::sinr:
                pt.diagnostic_ratio = cap.lambda_star / std::log2(x);
                break;
            case SweepVariable::deadline: {
                // asymptotic shape a - b/sqrt(d) with a = kappa W / r, b = c sqrt(a)
                const double r = channel::blocklength_for_reliability(
                    {cls.sinr_linear, cls.payload_bits}, cls.reliability_eps);
                const double a = kappa * w / r;
                const double b = channel::q_inverse(cls.reliability_eps) * std::sqrt(a);
                const double shape = a - b / std::sqrt(x);
                pt.diagnostic_ratio = shape > 0.0 ? cap.lambda_star / shape : 0.0;
                break;
            }
            case SweepVariable::reliability:
                pt.diagnostic_ratio = cap.lambda_star * (-std::log2(x));
                break;
        }
        curve.push_back(pt);
    }
    return curve;
}

}  // namespace urllc::dimensioning
