// Command-line front end: scenario ingestion, one subcommand per capability,
// CSV/JSON report emission. Exit codes: 0 success, 2 validation error,
// 3 infeasibility, 4 state-space capacity error.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "urllc/channel.hpp"
#include "urllc/dimensioning.hpp"
#include "urllc/errors.hpp"
#include "urllc/exact_queue.hpp"
#include "urllc/harq_optimizer.hpp"
#include "urllc/report.hpp"
#include "urllc/scenario.hpp"
#include "urllc/simulator.hpp"
#include "urllc/system_model.hpp"

using nlohmann::json;
using namespace urllc;

namespace {

struct CommonArgs {
    std::string scenario_path;
    std::string out_path;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

struct LoadedScenario {
    std::string text;
    std::string digest;
    scenario::Scenario spec;
};

LoadedScenario load(const CommonArgs& args) {
    std::ifstream in(args.scenario_path);
    if (!in) throw ValidationError("cannot open scenario '" + args.scenario_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    LoadedScenario ls;
    ls.text = buf.str();
    ls.digest = scenario::scenario_digest(ls.text);
    ls.spec = scenario::parse_scenario(ls.text);
    return ls;
}

void emit(const CommonArgs& args, const std::string& command, const std::string& digest,
          const report::CsvTable& csv, const json& payload) {
    report::Envelope env;
    env.scenario_digest = digest;
    env.command = command;
    env.timestamp = report::iso8601_utc_now();
    std::cerr << report::envelope_line(env) << "\n";

    std::string body;
    if (args.format == "json") {
        json doc;
        doc["tool_version"] = env.tool_version;
        doc["scenario_digest"] = env.scenario_digest;
        doc["command"] = env.command;
        doc["timestamp"] = env.timestamp;
        doc["payload"] = payload;
        body = doc.dump(2) + "\n";
    } else {
        body = csv.str();
    }
    if (args.out_path.empty()) {
        std::cout << body;
    } else {
        std::ofstream out(args.out_path, std::ios::binary);
        if (!out) throw ValidationError("cannot write '" + args.out_path + "'");
        out << body;
    }
}

std::string fmt(double v) { return report::format_number(v); }

json scheme_json(const ConfiguredClass& cc) {
    return json{{"name", cc.name},
                {"stages", cc.scheme.stages},
                {"blocklength", cc.scheme.blocklength},
                {"duration_sec", cc.scheme.duration},
                {"stage_bandwidth_hz", cc.scheme.stage_bandwidth},
                {"stage_failure_prob", cc.scheme.stage_failure_prob}};
}

int threads_or_default(const CommonArgs& args) {
    if (args.threads > 0) return args.threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

std::vector<exact_queue::LossClass> one_shot_loss_classes(const SystemConfig& sys) {
    std::vector<exact_queue::LossClass> loss;
    for (std::size_t i = 0; i < sys.classes.size(); ++i) {
        const auto& cc = sys.classes[i];
        if (cc.scheme.stages != 1)
            throw ValidationError(class_label(cc, i) +
                                  ": exact analysis covers one-shot schemes; use `simulate` for "
                                  "multi-stage systems");
        loss.push_back({cc.traffic.arrival_rate, cc.scheme.stage_bandwidth, cc.scheme.duration});
    }
    return loss;
}

// --- subcommands -----------------------------------------------------------

int cmd_dimension(const CommonArgs& args) {
    const auto ls = load(args);
    const auto sys = scenario::resolve_system(ls.spec);
    const double delta = scenario::staffing_delta(ls.spec);
    const auto res = dimensioning::harq_staffing(sys, delta);

    report::CsvTable csv({"delta", "kappa", "mean_utilization_hz", "utilization_variance_hz2",
                          "required_bandwidth_hz", "safety_coefficient"});
    csv.add_row({fmt(delta), fmt(sys.channel_use_density), fmt(res.mean_utilization),
                 fmt(res.utilization_variance), fmt(res.required_bandwidth),
                 fmt(res.safety_coefficient)});

    json payload{{"delta", delta},
                 {"kappa", sys.channel_use_density},
                 {"mean_utilization_hz", res.mean_utilization},
                 {"utilization_variance_hz2", res.utilization_variance},
                 {"required_bandwidth_hz", res.required_bandwidth},
                 {"safety_coefficient", res.safety_coefficient},
                 {"classes", json::array()}};
    for (const auto& cc : sys.classes) payload["classes"].push_back(scheme_json(cc));
    emit(args, "dimension", ls.digest, csv, payload);
    return 0;
}

dimensioning::SweepVariable parse_sweep_var(const std::string& name) {
    if (name == "W") return dimensioning::SweepVariable::bandwidth;
    if (name == "sinr") return dimensioning::SweepVariable::sinr;
    if (name == "d") return dimensioning::SweepVariable::deadline;
    if (name == "delta") return dimensioning::SweepVariable::reliability;
    throw ValidationError("sweep variable must be one of W, sinr, d, delta; got '" + name + "'");
}

std::vector<double> parse_sweep_grid(const std::string& spec, std::string& var_name) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() < 4 || parts.size() > 5)
        throw ValidationError("--sweep expects var:start:stop:steps[:log]");
    var_name = parts[0];
    const double start = std::stod(parts[1]);
    const double stop = std::stod(parts[2]);
    const int steps = std::stoi(parts[3]);
    const bool log_spacing = parts.size() == 5 && parts[4] == "log";
    if (parts.size() == 5 && !log_spacing)
        throw ValidationError("--sweep trailing token must be 'log'");
    if (steps < 1) throw ValidationError("--sweep needs steps >= 1");
    std::vector<double> grid;
    if (steps == 1) {
        grid.push_back(start);
        return grid;
    }
    if (log_spacing && !(start > 0.0 && stop > 0.0))
        throw ValidationError("log-spaced sweep needs positive bounds");
    for (int k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) / (steps - 1);
        grid.push_back(log_spacing ? start * std::pow(stop / start, t)
                                   : start + (stop - start) * t);
    }
    return grid;
}

int cmd_capacity(const CommonArgs& args, const std::string& sweep_spec) {
    const auto ls = load(args);
    if (ls.spec.classes.size() != 1)
        throw ValidationError("capacity is a single-class notion; the scenario has " +
                              std::to_string(ls.spec.classes.size()) + " classes");
    const auto classes = scenario::resolve_traffic(ls.spec);
    std::string var_name;
    const auto grid = parse_sweep_grid(sweep_spec, var_name);
    const auto var = parse_sweep_var(var_name);
    const auto curve = dimensioning::scaling_curves(classes[0].traffic, ls.spec.bandwidth,
                                                    ls.spec.kappa, var, grid);

    report::CsvTable csv({"sweep_var", "lambda_star", "diagnostic_ratio"});
    json points = json::array();
    for (const auto& pt : curve) {
        csv.add_row({fmt(pt.x), fmt(pt.lambda_star), fmt(pt.diagnostic_ratio)});
        points.push_back(json{{"x", pt.x},
                              {"lambda_star", pt.lambda_star},
                              {"diagnostic_ratio", pt.diagnostic_ratio},
                              {"feasible", pt.feasible}});
    }
    emit(args, "capacity", ls.digest, csv,
         json{{"variable", var_name}, {"points", points}});
    return 0;
}

harq_optimizer::Regime parse_regime(const std::string& name) {
    if (name == "mean") return harq_optimizer::Regime::mean_dominated;
    if (name == "variance") return harq_optimizer::Regime::variance_dominated;
    throw ValidationError("--regime must be 'mean' or 'variance', got '" + name + "'");
}

report::CsvTable harq_table(const std::vector<ConfiguredClass>& classes, double bandwidth,
                            double kappa, harq_optimizer::Regime regime, int m_max,
                            json* json_rows) {
    report::CsvTable csv({"class", "m", "r", "s", "h", "p_stage", "objective", "feasible"});
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto& cc = classes[i];
        const double lambda = cc.traffic.arrival_rate;
        const auto rows =
            harq_optimizer::sweep_table(cc.traffic, regime, lambda, kappa, m_max, bandwidth);
        for (const auto& row : rows) {
            csv.add_row({class_label(cc, i), std::to_string(row.stages), fmt(row.blocklength),
                         fmt(row.stage_duration), fmt(row.stage_bandwidth),
                         fmt(row.stage_failure_prob), fmt(row.objective),
                         row.feasible ? "1" : "0"});
            if (json_rows)
                json_rows->push_back(json{{"class", class_label(cc, i)},
                                          {"m", row.stages},
                                          {"r", row.blocklength},
                                          {"s", row.stage_duration},
                                          {"h", row.stage_bandwidth},
                                          {"p_stage", row.stage_failure_prob},
                                          {"objective", row.objective},
                                          {"feasible", row.feasible},
                                          {"infeasible_reason", row.infeasible_reason}});
        }
    }
    return csv;
}

int cmd_optimize_harq(const CommonArgs& args, const std::string& regime_name, int m_max) {
    const auto ls = load(args);
    const auto classes = scenario::resolve_traffic(ls.spec);
    const auto regime = parse_regime(regime_name);

    json best = json::array();
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const auto& cc = classes[i];
        const auto res =
            harq_optimizer::optimize(cc.traffic, regime, ls.spec.bandwidth, ls.spec.kappa, m_max);
        ConfiguredClass materialized = cc;
        materialized.scheme = res.best_scheme;
        json entry = scheme_json(materialized);
        entry["objective_per_unit_rate"] = res.objective.value;
        best.push_back(entry);
    }
    json rows = json::array();
    const auto csv = harq_table(classes, ls.spec.bandwidth, ls.spec.kappa, regime, m_max, &rows);
    emit(args, "optimize-harq", ls.digest, csv,
         json{{"regime", regime_name}, {"best", best}, {"table", rows}});
    return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& regime_name, int m_max) {
    const auto ls = load(args);
    const auto classes = scenario::resolve_traffic(ls.spec);
    json rows = json::array();
    const auto csv = harq_table(classes, ls.spec.bandwidth, ls.spec.kappa,
                                parse_regime(regime_name), m_max, &rows);
    emit(args, "sweep", ls.digest, csv, json{{"regime", regime_name}, {"table", rows}});
    return 0;
}

int cmd_blocking(const CommonArgs& args, int split_q, int split_class) {
    const auto ls = load(args);
    const auto sys = scenario::resolve_system(ls.spec);
    const auto loss = one_shot_loss_classes(sys);

    if (split_q > 0) {
        const auto cmp = exact_queue::compare_tall_wide(
            loss, sys.bandwidth, static_cast<std::size_t>(split_class), split_q);
        report::CsvTable csv({"class", "load", "blocking_before", "blocking_after"});
        json rows = json::array();
        for (std::size_t c = 0; c < loss.size(); ++c) {
            csv.add_row({class_label(sys.classes[c], c), fmt(loss[c].load()),
                         fmt(cmp.blocking_before[c]), fmt(cmp.blocking_after[c])});
            rows.push_back(json{{"class", class_label(sys.classes[c], c)},
                                {"load", loss[c].load()},
                                {"blocking_before", cmp.blocking_before[c]},
                                {"blocking_after", cmp.blocking_after[c]}});
        }
        emit(args, "blocking", ls.digest, csv,
             json{{"split_class", split_class},
                  {"split_q", split_q},
                  {"split_load_below_one", cmp.split_load_below_one},
                  {"classes", rows}});
        return 0;
    }

    const auto rep = exact_queue::blocking_probability(loss, sys.bandwidth);
    report::CsvTable csv(
        {"class", "arrival_rate_per_sec", "bandwidth_hz", "duration_sec", "load", "blocking"});
    json rows = json::array();
    for (std::size_t c = 0; c < loss.size(); ++c) {
        csv.add_row({class_label(sys.classes[c], c), fmt(loss[c].arrival_rate),
                     fmt(loss[c].bandwidth), fmt(loss[c].duration), fmt(loss[c].load()),
                     fmt(rep.per_class_blocking[c])});
        rows.push_back(json{{"class", class_label(sys.classes[c], c)},
                            {"arrival_rate_per_sec", loss[c].arrival_rate},
                            {"bandwidth_hz", loss[c].bandwidth},
                            {"duration_sec", loss[c].duration},
                            {"load", loss[c].load()},
                            {"blocking", rep.per_class_blocking[c]}});
    }
    emit(args, "blocking", ls.digest, csv,
         json{{"normalizing_constant", rep.normalizing_constant},
              {"state_count", rep.state_count},
              {"classes", rows}});
    return 0;
}

json estimate_json(const simulator::Estimate& e) {
    return json{{"value", e.value}, {"half_width", e.half_width}};
}

int cmd_simulate(const CommonArgs& args, bool trace) {
    const auto ls = load(args);
    const auto sys = scenario::resolve_system(ls.spec);
    auto cfg = scenario::resolve_sim(ls.spec, sys);
    if (args.seed) cfg.seed = *args.seed;

    std::optional<std::ofstream> trace_file;
    std::optional<simulator::TraceSink> sink;
    std::string trace_path;
    if (trace) {
        trace_path = args.out_path.empty() ? "trace.csv" : args.out_path + ".trace.csv";
        trace_file.emplace(trace_path, std::ios::binary);
        if (!*trace_file) throw ValidationError("cannot write trace '" + trace_path + "'");
        *trace_file << "class,stage,start,end,outcome\n";
        sink = [&](const simulator::TraceRow& row) {
            *trace_file << row.class_index << "," << row.stage << "," << fmt(row.start) << ","
                        << fmt(row.end) << "," << row.outcome << "\n";
        };
    }

    const auto rep = simulator::simulate(cfg, threads_or_default(args), sink ? &*sink : nullptr);

    report::CsvTable csv({"class", "arrivals", "delivered", "blocked_dropped", "decode_exhausted",
                          "in_flight", "blocking_rate", "blocking_rate_hw", "arrival_blocking",
                          "arrival_blocking_hw", "decode_failure_rate", "decode_failure_rate_hw",
                          "qos_violation_rate", "qos_violation_rate_hw", "delay_mean_sec",
                          "delay_p99_sec", "delay_p999_sec"});
    json classes = json::array();
    for (std::size_t c = 0; c < rep.per_class.size(); ++c) {
        const auto& pc = rep.per_class[c];
        csv.add_row({class_label(sys.classes[c], c), std::to_string(pc.arrivals),
                     std::to_string(pc.delivered), std::to_string(pc.blocked_dropped),
                     std::to_string(pc.decode_exhausted), std::to_string(pc.in_flight),
                     fmt(pc.blocking_rate.value), fmt(pc.blocking_rate.half_width),
                     fmt(pc.arrival_blocking.value), fmt(pc.arrival_blocking.half_width),
                     fmt(pc.decode_failure_rate.value), fmt(pc.decode_failure_rate.half_width),
                     fmt(pc.qos_violation_rate.value), fmt(pc.qos_violation_rate.half_width),
                     fmt(pc.delay_mean.value), fmt(pc.delay_p99), fmt(pc.delay_p999)});
        json stages = json::array();
        for (const auto& st : pc.per_stage)
            stages.push_back(json{{"requests", st.requests},
                                  {"blocked", st.blocked},
                                  {"blocking_rate", estimate_json(st.blocking_rate)},
                                  {"mean_occupancy", estimate_json(st.mean_occupancy)}});
        classes.push_back(json{{"class", class_label(sys.classes[c], c)},
                               {"arrivals", pc.arrivals},
                               {"delivered", pc.delivered},
                               {"blocked_dropped", pc.blocked_dropped},
                               {"decode_exhausted", pc.decode_exhausted},
                               {"in_flight", pc.in_flight},
                               {"blocking_rate", estimate_json(pc.blocking_rate)},
                               {"arrival_blocking", estimate_json(pc.arrival_blocking)},
                               {"time_blocked_fraction", estimate_json(pc.time_blocked_fraction)},
                               {"decode_failure_rate", estimate_json(pc.decode_failure_rate)},
                               {"qos_violation_rate", estimate_json(pc.qos_violation_rate)},
                               {"delay_mean_sec", estimate_json(pc.delay_mean)},
                               {"delay_p99_sec", pc.delay_p99},
                               {"delay_p999_sec", pc.delay_p999},
                               {"per_stage", stages}});
    }
    json payload{{"seed", rep.seed},
                 {"horizon_sec", rep.horizon},
                 {"warmup_sec", rep.warmup},
                 {"replications", rep.replications},
                 {"occupancy_mean_hz", estimate_json(rep.occupancy_mean)},
                 {"occupancy_variance_hz2", estimate_json(rep.occupancy_variance)},
                 {"warnings", rep.warnings},
                 {"classes", classes}};
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
    emit(args, "simulate", ls.digest, csv, payload);
    return 0;
}

int cmd_validate(const CommonArgs& args, double k_sigmas) {
    const auto ls = load(args);
    const auto sys = scenario::resolve_system(ls.spec);
    auto cfg = scenario::resolve_sim(ls.spec, sys);
    if (args.seed) cfg.seed = *args.seed;
    const auto diff = simulator::validate_against_exact(cfg, k_sigmas, threads_or_default(args));

    report::CsvTable csv({"class", "exact", "simulated", "half_width", "sigmas", "pass"});
    json rows = json::array();
    for (std::size_t c = 0; c < diff.per_class.size(); ++c) {
        const auto& row = diff.per_class[c];
        csv.add_row({class_label(sys.classes[c], c), fmt(row.exact), fmt(row.simulated.value),
                     fmt(row.simulated.half_width), fmt(row.sigmas), row.pass ? "1" : "0"});
        rows.push_back(json{{"class", class_label(sys.classes[c], c)},
                            {"exact", row.exact},
                            {"simulated", estimate_json(row.simulated)},
                            {"sigmas", row.sigmas},
                            {"pass", row.pass}});
    }
    emit(args, "validate", ls.digest, csv,
         json{{"k_sigmas", k_sigmas}, {"pass", diff.pass}, {"classes", rows}});
    return 0;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--scenario", args.scenario_path, "scenario file (JSON, schema 1)")
        ->required();
    cmd->add_option("--out", args.out_path, "write the report payload to this path");
    cmd->add_option("--format", args.format, "payload format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->default_val("csv");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&args](std::uint64_t v) { args.seed = v; },
        "override the scenario's simulation seed");
    cmd->add_option("--threads", args.threads, "max worker threads (default: hardware)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"URLLC capacity-planning toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string regime = "mean", sweep_spec;
    int m_max = 8, split_q = 0, split_class = 0;
    double k_sigmas = 3.0;
    bool trace = false;

    auto* dimension = app.add_subcommand("dimension", "required bandwidth via square-root staffing");
    add_common(dimension, args);
    auto* capacity = app.add_subcommand("capacity", "single-class capacity scaling curves");
    add_common(capacity, args);
    capacity->add_option("--sweep", sweep_spec, "var:start:stop:steps[:log], var in {W,sinr,d,delta}")
        ->required();
    auto* optimize = app.add_subcommand("optimize-harq", "optimal repetition-coding HARQ schemes");
    add_common(optimize, args);
    optimize->add_option("--regime", regime, "objective regime")->required()
        ->check(CLI::IsMember({"mean", "variance"}));
    optimize->add_option("--m-max", m_max, "largest stage count to consider");
    auto* blocking = app.add_subcommand("blocking", "exact blocking probabilities");
    add_common(blocking, args);
    blocking->add_option("--split", split_q, "tall/wide comparison factor q");
    blocking->add_option("--split-class", split_class, "class index to split (default 0)");
    auto* simulate = app.add_subcommand("simulate", "discrete-event simulation report");
    add_common(simulate, args);
    simulate->add_flag("--trace", trace, "write per-packet trace CSV");
    auto* validate_cmd = app.add_subcommand("validate", "simulated vs exact blocking diff");
    add_common(validate_cmd, args);
    validate_cmd->add_option("--k", k_sigmas, "acceptance band in half-width units (default 3)");
    auto* sweep = app.add_subcommand("sweep", "per-m HARQ objective tables");
    add_common(sweep, args);
    sweep->add_option("--regime", regime, "objective regime")->required()
        ->check(CLI::IsMember({"mean", "variance"}));
    sweep->add_option("--m-max", m_max, "largest stage count to consider");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (dimension->parsed()) return cmd_dimension(args);
        if (capacity->parsed()) return cmd_capacity(args, sweep_spec);
        if (optimize->parsed()) return cmd_optimize_harq(args, regime, m_max);
        if (blocking->parsed()) return cmd_blocking(args, split_q, split_class);
        if (simulate->parsed()) return cmd_simulate(args, trace);
        if (validate_cmd->parsed()) return cmd_validate(args, k_sigmas);
        if (sweep->parsed()) return cmd_sweep(args, regime, m_max);
    } catch (const StateSpaceError& e) {
        std::cerr << "error (state space): " << e.what() << "\n";
        return 4;
    } catch (const InfeasibilityError& e) {
        std::cerr << "error (infeasible): " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error (validation): " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error (validation): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
