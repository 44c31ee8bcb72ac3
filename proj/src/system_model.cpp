#include "urllc/system_model.hpp"

#include <cmath>
#include <string>

#include "urllc/errors.hpp"

namespace urllc {

std::string class_label(const ConfiguredClass& cls, std::size_t index) {
    return cls.name.empty() ? "class " + std::to_string(index) : "class '" + cls.name + "'";
}

void validate(const SystemConfig& config) {
    if (!(config.bandwidth > 0.0))
        throw ValidationError("system bandwidth must be > 0");
    if (!(config.channel_use_density > 0.0))
        throw ValidationError("channel-use density kappa must be > 0");

    for (std::size_t i = 0; i < config.classes.size(); ++i) {
        const auto& cc = config.classes[i];
        const auto& t = cc.traffic;
        const auto& s = cc.scheme;
        const std::string who = class_label(cc, i);

        if (!(t.arrival_rate >= 0.0)) throw ValidationError(who + ": arrival rate must be >= 0");
        if (t.payload_bits < 1) throw ValidationError(who + ": payload must be >= 1 bit");
        if (!(t.sinr_linear > 0.0)) throw ValidationError(who + ": SINR must be > 0");
        if (!(t.reliability_eps > 0.0 && t.reliability_eps < 1.0))
            throw ValidationError(who + ": reliability target must be in (0, 1)");
        if (!(t.feedback_delay >= 0.0)) throw ValidationError(who + ": feedback delay must be >= 0");
        if (!(t.deadline > t.feedback_delay))
            throw ValidationError(who + ": deadline must exceed the feedback delay");

        if (s.stages < 1) throw ValidationError(who + ": scheme needs at least one stage");
        if (!(s.duration > 0.0)) throw ValidationError(who + ": stage duration must be > 0");
        if (!(s.blocklength > 0.0)) throw ValidationError(who + ": stage blocklength must be > 0");
        if (!(s.stage_failure_prob >= 0.0 && s.stage_failure_prob < 1.0))
            throw ValidationError(who + ": stage failure probability must be in [0, 1)");

        const double budget = s.stages * (s.duration + t.feedback_delay);
        if (budget > t.deadline * (1.0 + 1e-12))
            throw ValidationError(who + ": scheme misses the deadline: " + std::to_string(s.stages) +
                                  " stages x (duration + feedback) = " + std::to_string(budget) +
                                  " s > deadline " + std::to_string(t.deadline) + " s");
        if (s.stage_bandwidth > config.bandwidth * (1.0 + 1e-12))
            throw ValidationError(who + ": stage bandwidth " + std::to_string(s.stage_bandwidth) +
                                  " Hz exceeds system bandwidth " + std::to_string(config.bandwidth) + " Hz");
        const double uses = config.channel_use_density * s.stage_bandwidth * s.duration;
        if (std::abs(uses - s.blocklength) > 1.0 + 1e-9)
            throw ValidationError(who + ": kappa*h*s = " + std::to_string(uses) +
                                  " is more than one channel use away from blocklength " +
                                  std::to_string(s.blocklength));
        const double residual = std::pow(s.stage_failure_prob, s.stages);
        if (residual > t.reliability_eps * (1.0 + 1e-9))
            throw ValidationError(who + ": decode-failure residual p^m = " + std::to_string(residual) +
                                  " exceeds reliability target " + std::to_string(t.reliability_eps));
    }
}

}  // namespace urllc
