// Scenario file ingestion: JSON schema (version 1), validation, digest, and
// resolution of per-class scheme specs into concrete HARQ schemes.
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "urllc/harq_optimizer.hpp"
#include "urllc/simulator.hpp"
#include "urllc/system_model.hpp"

namespace urllc::scenario {

struct FixedStages {
    int stages = 1;
    std::optional<double> blocklength;  // pin the per-stage channel uses (else minimal feasible)
};
struct OptimizeScheme {
    harq_optimizer::Regime regime;
};
// monostate = default one-shot scheme
using SchemeSpec = std::variant<std::monostate, FixedStages, OptimizeScheme>;

struct ScenarioClass {
    std::string name;
    double arrival_rate = 0.0;
    int payload_bits = 256;
    double sinr_value = 10.0;  // in the unit given by sinr_in_db
    bool sinr_in_db = true;
    double deadline = 1e-3;
    double reliability_eps = 1e-6;
    double feedback_delay = 0.0;
    SchemeSpec scheme;
};

struct SimSettings {
    std::optional<std::uint64_t> seed;
    std::optional<double> horizon;
    std::optional<double> warmup;
    std::optional<int> replications;
};

struct Scenario {
    int schema = 1;
    double bandwidth = 0.0;
    double kappa = 1.0;
    std::optional<double> staffing_delta;  // default: most stringent class target
    std::vector<ScenarioClass> classes;
    SimSettings sim;
};

/// Parses and validates a scenario file. Unknown keys are rejected so that
/// parse -> serialize -> parse is the identity on semantic content.
Scenario load_scenario_file(const std::string& path);
Scenario parse_scenario(const std::string& json_text);
std::string serialize_scenario(const Scenario& s);

/// FNV-1a over the canonical (key-sorted) JSON form; stable under field
/// reordering of semantically identical files.
std::string scenario_digest(const std::string& json_text);

double sinr_db_to_linear(double db);

/// Traffic classes with schemes resolved: fixed stage counts use the minimal
/// integer blocklength at the per-stage target (or the pinned blocklength),
/// "optimize:<regime>" runs the optimizer, absent scheme means one-shot.
SystemConfig resolve_system(const Scenario& s);

/// Traffic classes only, for commands that choose their own schemes
/// (optimize-harq, sweep, capacity). The returned schemes are unset.
std::vector<ConfiguredClass> resolve_traffic(const Scenario& s);

/// System-level staffing target: explicit staffing_delta or the smallest class
/// reliability target.
double staffing_delta(const Scenario& s);

/// SimConfig with defaults filled in (seed 1, default warmup/horizon, 8 replications).
simulator::SimConfig resolve_sim(const Scenario& s, const SystemConfig& system);

}  // namespace urllc::scenario
