#include "urllc/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "urllc/channel.hpp"
#include "urllc/errors.hpp"

namespace urllc::scenario {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ValidationError("scenario: " + where + ": " + what);
}

void expect_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.contains(key)) fail(where, "unknown key '" + key + "'");
}

double number(const json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) fail(where, "missing '" + key + "'");
    if (!obj[key].is_number()) fail(where, "'" + key + "' must be a number");
    return obj[key].get<double>();
}

SchemeSpec parse_scheme(const json& j, const std::string& where) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "optimize:mean") return OptimizeScheme{harq_optimizer::Regime::mean_dominated};
        if (s == "optimize:variance")
            return OptimizeScheme{harq_optimizer::Regime::variance_dominated};
        fail(where, "scheme string must be 'optimize:mean' or 'optimize:variance', got '" + s + "'");
    }
    if (j.is_object()) {
        expect_keys(j, where + ".scheme", {"stages", "blocklength"});
        if (!j.contains("stages") || !j["stages"].is_number_integer())
            fail(where, "scheme object needs integer 'stages'");
        FixedStages fixed;
        fixed.stages = j["stages"].get<int>();
        if (fixed.stages < 1) fail(where, "scheme stages must be >= 1");
        if (j.contains("blocklength")) {
            if (!j["blocklength"].is_number()) fail(where, "scheme blocklength must be a number");
            fixed.blocklength = j["blocklength"].get<double>();
            if (!(*fixed.blocklength >= 1.0)) fail(where, "scheme blocklength must be >= 1");
        }
        return fixed;
    }
    fail(where, "scheme must be a string or an object");
}

}  // namespace

double sinr_db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

Scenario parse_scenario(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("scenario: malformed JSON: ") + e.what());
    }
    if (!root.is_object()) throw ValidationError("scenario: top level must be an object");
    expect_keys(root, "top level", {"schema", "system", "sim"});
    if (!root.contains("schema") || !root["schema"].is_number_integer() ||
        root["schema"].get<int>() != 1)
        throw ValidationError("scenario: requires \"schema\": 1");
    if (!root.contains("system") || !root["system"].is_object())
        throw ValidationError("scenario: missing system block");

    Scenario s;
    const json& sys = root["system"];
    expect_keys(sys, "system",
                {"bandwidth_hz", "kappa", "kappa_preset", "staffing_delta", "classes"});
    s.bandwidth = number(sys, "system", "bandwidth_hz");
    if (sys.contains("kappa") && sys.contains("kappa_preset"))
        fail("system", "give kappa or kappa_preset, not both");
    if (sys.contains("kappa_preset")) {
        const std::string preset = sys["kappa_preset"].get<std::string>();
        if (preset != "nr-numerology-0") fail("system", "unknown kappa_preset '" + preset + "'");
        s.kappa = kNrNumerology0Kappa;
    } else if (sys.contains("kappa")) {
        s.kappa = number(sys, "system", "kappa");
    }
    if (sys.contains("staffing_delta")) s.staffing_delta = number(sys, "system", "staffing_delta");

    if (!sys.contains("classes") || !sys["classes"].is_array() || sys["classes"].empty())
        fail("system", "needs a non-empty classes array");
    for (std::size_t i = 0; i < sys["classes"].size(); ++i) {
        const json& jc = sys["classes"][i];
        const std::string where = "classes[" + std::to_string(i) + "]";
        if (!jc.is_object()) fail(where, "must be an object");
        expect_keys(jc, where,
                    {"name", "arrival_rate_per_sec", "payload_bits", "sinr_db", "sinr_linear",
                     "deadline_sec", "reliability_eps", "feedback_delay_sec", "scheme"});
        ScenarioClass c;
        if (jc.contains("name")) c.name = jc["name"].get<std::string>();
        c.arrival_rate = number(jc, where, "arrival_rate_per_sec");
        if (!jc.contains("payload_bits") || !jc["payload_bits"].is_number_integer())
            fail(where, "needs integer payload_bits");
        c.payload_bits = jc["payload_bits"].get<int>();
        const bool has_db = jc.contains("sinr_db"), has_lin = jc.contains("sinr_linear");
        if (has_db == has_lin) fail(where, "needs exactly one of sinr_db / sinr_linear");
        c.sinr_in_db = has_db;
        c.sinr_value = number(jc, where, has_db ? "sinr_db" : "sinr_linear");
        c.deadline = number(jc, where, "deadline_sec");
        c.reliability_eps = number(jc, where, "reliability_eps");
        if (jc.contains("feedback_delay_sec"))
            c.feedback_delay = number(jc, where, "feedback_delay_sec");
        if (jc.contains("scheme")) c.scheme = parse_scheme(jc["scheme"], where);
        s.classes.push_back(std::move(c));
    }

    if (root.contains("sim")) {
        const json& sim = root["sim"];
        expect_keys(sim, "sim", {"seed", "horizon_sec", "warmup_sec", "replications"});
        if (sim.contains("seed")) s.sim.seed = sim["seed"].get<std::uint64_t>();
        if (sim.contains("horizon_sec")) s.sim.horizon = number(sim, "sim", "horizon_sec");
        if (sim.contains("warmup_sec")) s.sim.warmup = number(sim, "sim", "warmup_sec");
        if (sim.contains("replications")) s.sim.replications = sim["replications"].get<int>();
    }

    // eager validation of the class-level invariants the types demand
    for (std::size_t i = 0; i < s.classes.size(); ++i) {
        const auto& c = s.classes[i];
        const std::string where = "classes[" + std::to_string(i) + "]";
        if (!(c.arrival_rate >= 0.0)) fail(where, "arrival rate must be >= 0");
        if (c.payload_bits < 1) fail(where, "payload_bits must be >= 1");
        const double lin = c.sinr_in_db ? sinr_db_to_linear(c.sinr_value) : c.sinr_value;
        if (!(lin > 0.0)) fail(where, "SINR must be positive");
        if (!(c.reliability_eps > 0.0 && c.reliability_eps < 1.0))
            fail(where, "reliability_eps must be in (0, 1)");
        if (!(c.feedback_delay >= 0.0)) fail(where, "feedback delay must be >= 0");
        if (!(c.deadline > c.feedback_delay)) fail(where, "deadline must exceed feedback delay");
    }
    if (!(s.bandwidth > 0.0)) throw ValidationError("scenario: bandwidth_hz must be > 0");
    if (!(s.kappa > 0.0)) throw ValidationError("scenario: kappa must be > 0");
    if (s.staffing_delta && !(*s.staffing_delta > 0.0 && *s.staffing_delta < 1.0))
        throw ValidationError("scenario: staffing_delta must be in (0, 1)");
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("scenario: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
    json sys;
    sys["bandwidth_hz"] = s.bandwidth;
    sys["kappa"] = s.kappa;
    if (s.staffing_delta) sys["staffing_delta"] = *s.staffing_delta;
    sys["classes"] = json::array();
    for (const auto& c : s.classes) {
        json jc;
        if (!c.name.empty()) jc["name"] = c.name;
        jc["arrival_rate_per_sec"] = c.arrival_rate;
        jc["payload_bits"] = c.payload_bits;
        jc[c.sinr_in_db ? "sinr_db" : "sinr_linear"] = c.sinr_value;
        jc["deadline_sec"] = c.deadline;
        jc["reliability_eps"] = c.reliability_eps;
        jc["feedback_delay_sec"] = c.feedback_delay;
        if (std::holds_alternative<FixedStages>(c.scheme)) {
            const auto& fixed = std::get<FixedStages>(c.scheme);
            jc["scheme"] = json{{"stages", fixed.stages}};
            if (fixed.blocklength) jc["scheme"]["blocklength"] = *fixed.blocklength;
        } else if (std::holds_alternative<OptimizeScheme>(c.scheme))
            jc["scheme"] = std::get<OptimizeScheme>(c.scheme).regime ==
                                   harq_optimizer::Regime::mean_dominated
                               ? "optimize:mean"
                               : "optimize:variance";
        sys["classes"].push_back(jc);
    }
    json root;
    root["schema"] = 1;
    root["system"] = sys;
    json sim;
    if (s.sim.seed) sim["seed"] = *s.sim.seed;
    if (s.sim.horizon) sim["horizon_sec"] = *s.sim.horizon;
    if (s.sim.warmup) sim["warmup_sec"] = *s.sim.warmup;
    if (s.sim.replications) sim["replications"] = *s.sim.replications;
    if (!sim.empty()) root["sim"] = sim;
    return root.dump(2);
}

std::string scenario_digest(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("scenario: malformed JSON: ") + e.what());
    }
    const std::string canonical = root.dump();  // object keys are sorted
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double staffing_delta(const Scenario& s) {
    if (s.staffing_delta) return *s.staffing_delta;
    double d = 1.0;
    for (const auto& c : s.classes) d = std::min(d, c.reliability_eps);
    return d;
}

SystemConfig resolve_system(const Scenario& s) {
    SystemConfig sys;
    sys.bandwidth = s.bandwidth;
    sys.channel_use_density = s.kappa;
    for (std::size_t i = 0; i < s.classes.size(); ++i) {
        const auto& c = s.classes[i];
        ConfiguredClass cc;
        cc.name = c.name;
        cc.traffic.arrival_rate = c.arrival_rate;
        cc.traffic.payload_bits = c.payload_bits;
        cc.traffic.sinr_linear = c.sinr_in_db ? sinr_db_to_linear(c.sinr_value) : c.sinr_value;
        cc.traffic.deadline = c.deadline;
        cc.traffic.reliability_eps = c.reliability_eps;
        cc.traffic.feedback_delay = c.feedback_delay;

        if (std::holds_alternative<OptimizeScheme>(c.scheme)) {
            const auto regime = std::get<OptimizeScheme>(c.scheme).regime;
            cc.scheme =
                harq_optimizer::optimize(cc.traffic, regime, sys.bandwidth, sys.channel_use_density)
                    .best_scheme;
        } else {
            const auto* fixed = std::get_if<FixedStages>(&c.scheme);
            const int stages = fixed ? fixed->stages : 1;
            const double stage_time = c.deadline / stages - c.feedback_delay;
            if (!(stage_time > 0.0))
                throw ValidationError("scenario: classes[" + std::to_string(i) + "]: " +
                                      std::to_string(stages) +
                                      " stages leave no transmission time within the deadline");
            HarqScheme scheme;
            scheme.stages = stages;
            if (fixed && fixed->blocklength) {
                scheme.blocklength = *fixed->blocklength;
            } else {
                const double target = stages == 1
                                          ? c.reliability_eps
                                          : std::exp(std::log(c.reliability_eps) / stages);
                scheme.blocklength =
                    static_cast<double>(harq_optimizer::minimal_blocklength_for_stage_target(
                        {cc.traffic.sinr_linear, c.payload_bits}, target));
            }
            scheme.duration = stage_time;
            scheme.stage_bandwidth = scheme.blocklength / (s.kappa * stage_time);
            scheme.stage_failure_prob = channel::failure_probability(
                scheme.blocklength, {cc.traffic.sinr_linear, c.payload_bits});
            cc.scheme = scheme;
        }
        sys.classes.push_back(std::move(cc));
    }
    validate(sys);
    return sys;
}

std::vector<ConfiguredClass> resolve_traffic(const Scenario& s) {
    std::vector<ConfiguredClass> out;
    for (const auto& c : s.classes) {
        ConfiguredClass cc;
        cc.name = c.name;
        cc.traffic.arrival_rate = c.arrival_rate;
        cc.traffic.payload_bits = c.payload_bits;
        cc.traffic.sinr_linear = c.sinr_in_db ? sinr_db_to_linear(c.sinr_value) : c.sinr_value;
        cc.traffic.deadline = c.deadline;
        cc.traffic.reliability_eps = c.reliability_eps;
        cc.traffic.feedback_delay = c.feedback_delay;
        out.push_back(std::move(cc));
    }
    return out;
}

simulator::SimConfig resolve_sim(const Scenario& s, const SystemConfig& system) {
    simulator::SimConfig cfg;
    cfg.system = system;
    cfg.warmup = s.sim.warmup.value_or(simulator::default_warmup(system));
    cfg.horizon = s.sim.horizon.value_or(simulator::default_horizon(system, cfg.warmup));
    cfg.seed = s.sim.seed.value_or(1);
    cfg.replications = s.sim.replications.value_or(8);
    return cfg;
}

}  // namespace urllc::scenario
