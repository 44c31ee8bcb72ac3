// Shared domain types: traffic classes, HARQ schemes, and the system
// configuration consumed by dimensioning, optimization, and simulation.
#pragma once

#include <string>
#include <vector>

namespace urllc {

// One SINR class of URLLC traffic and its QoS contract: payload_bits must be
// delivered within `deadline` with probability >= 1 - reliability_eps.
struct TrafficClass {
    double arrival_rate = 0.0;     // packets/sec, >= 0
    int payload_bits = 256;        // >= 1
    double sinr_linear = 1.0;      // > 0 (dB conversion happens at the CLI boundary)
    double deadline = 1e-3;        // sec, > feedback_delay
    double reliability_eps = 1e-6; // in (0, 1)
    double feedback_delay = 0.0;   // sec, >= 0
};

// Homogeneous repetition-coding transmission plan: up to `stages` attempts,
// each using `blocklength` channel uses over `duration` seconds and
// `stage_bandwidth` Hz, failing independently with stage_failure_prob.
struct HarqScheme {
    int stages = 1;                  // m >= 1
    double blocklength = 0.0;        // channel uses per stage (integerized when materialized)
    double duration = 0.0;           // sec per stage, > 0
    double stage_bandwidth = 0.0;    // Hz, kappa * h * s = r
    double stage_failure_prob = 0.0; // in [0, 1)
};

struct ConfiguredClass {
    TrafficClass traffic;
    HarqScheme scheme;
    std::string name;  // for error reporting; empty -> "class <index>"
};

struct SystemConfig {
    double bandwidth = 0.0;           // W, Hz
    double channel_use_density = 1.0; // kappa, channel uses per sec per Hz
    std::vector<ConfiguredClass> classes;
};

// kappa preset for 5G NR numerology 0: 12 subcarriers x 14 symbols per
// (180 kHz x 1 ms) resource block.
inline constexpr double kNrNumerology0Kappa = 12.0 * 14.0 / (180e3 * 1e-3);

/// Throws ValidationError (naming the class) if any invariant is violated:
/// positive rates/durations, scheme deadline budget m*(s+f) <= d, per-stage
/// bandwidth <= W, kappa*h*s = r within one channel use, p^m <= eps.
void validate(const SystemConfig& config);

/// Class display name used in validation messages.
std::string class_label(const ConfiguredClass& cls, std::size_t index);

}  // namespace urllc
