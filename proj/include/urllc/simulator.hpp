// Discrete-event simulation of the two-queue system: Poisson arrivals,
// immediate-scheduling loss discipline, deterministic transmission and feedback
// times, Bernoulli decoding with stage routing. One replication is strictly
// single-threaded; replications run concurrently and merge deterministically.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "urllc/system_model.hpp"

namespace urllc::simulator {

struct SimConfig {
    SystemConfig system;
    double horizon = 0.0;        // sec of simulated time
    double warmup = 0.0;         // sec discarded before statistics
    std::uint64_t seed = 0;
    int replications = 1;
};

struct Estimate {
    double value = 0.0;
    double half_width = 0.0;  // 95% across replications (0 when replications == 1)
};

struct StageStats {
    std::int64_t requests = 0;  // summed over replications
    std::int64_t blocked = 0;
    Estimate blocking_rate;
    Estimate mean_occupancy;    // time-averaged concurrent transmissions of this stage
};

struct ClassStats {
    std::int64_t arrivals = 0;
    std::int64_t delivered = 0;
    std::int64_t blocked_dropped = 0;
    std::int64_t decode_exhausted = 0;
    std::int64_t in_flight = 0;          // unfinished at the horizon
    Estimate blocking_rate;              // blocked requests over all stage requests
    Estimate arrival_blocking;           // first-stage request blocking (PASTA-comparable)
    Estimate time_blocked_fraction;      // time share where a first-stage request would block
    Estimate decode_failure_rate;        // exhausted / arrivals
    Estimate qos_violation_rate;         // 1 - delivered-within-deadline / arrivals
    Estimate delay_mean;                 // over delivered packets
    double delay_p99 = 0.0;              // pooled over replications
    double delay_p999 = 0.0;
    std::vector<StageStats> per_stage;
};

struct SimReport {
    std::vector<ClassStats> per_class;
    Estimate occupancy_mean;      // Hz, time-averaged
    Estimate occupancy_variance;  // Hz^2
    double horizon = 0.0;
    double warmup = 0.0;
    std::uint64_t seed = 0;
    int replications = 1;
    std::vector<std::string> warnings;
};

struct TraceRow {
    int class_index;
    int stage;
    double start;
    double end;
    const char* outcome;  // "blocked" | "decoded" | "failed"
};
using TraceSink = std::function<void(const TraceRow&)>;

/// Runs `config.replications` independent replications (seeds derived from
/// config.seed) and merges them. Identical (config, seed) yields a bit-identical
/// report. `trace`, when given, receives replication 0's per-stage rows.
SimReport simulate(const SimConfig& config, int threads = 1, const TraceSink* trace = nullptr);

/// Time-averaged total-occupancy moments of a finished run.
inline std::pair<double, double> occupancy_moments(const SimReport& report) {
    return {report.occupancy_mean.value, report.occupancy_variance.value};
}

/// 10x the longest deadline.
double default_warmup(const SystemConfig& system);

/// Sized so the rarest tracked event (arrival or decode-exhaust per class)
/// expects >= 100 occurrences, clamped to [1000 * max deadline, 120 s]; the
/// report warns when the clamp leaves a rare event under-sampled.
double default_horizon(const SystemConfig& system, double warmup);

struct ValidationRow {
    double exact = 0.0;
    Estimate simulated;
    double sigmas = 0.0;  // |simulated - exact| in half-width units
    bool pass = false;
};

struct ValidationDiff {
    std::vector<ValidationRow> per_class;
    bool pass = false;
};

/// Compares simulated first-stage blocking against the exact stationary
/// analysis on a one-shot (single-stage schemes) system; a class passes when
/// |simulated - exact| <= k_sigmas * half-width.
ValidationDiff validate_against_exact(const SimConfig& config, double k_sigmas, int threads = 1);

}  // namespace urllc::simulator
