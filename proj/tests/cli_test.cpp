// End-to-end checks of the CLI binary: exit codes, payload formats,
// reproducibility. Drives the real executable through std::system.
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#ifndef URLLC_CLI_PATH
#error "URLLC_CLI_PATH must be defined by the build"
#endif
#ifndef URLLC_SCENARIO_DIR
#error "URLLC_SCENARIO_DIR must be defined by the build"
#endif

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

int counter = 0;

RunResult run_cli(const std::string& cmdline) {
    const std::string out_file = "cli_out_" + std::to_string(counter++) + ".tmp";
    const std::string full = std::string(URLLC_CLI_PATH) + " " + cmdline + " > " + out_file + " 2>cli_err.tmp";
    const int rc = std::system(full.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(rc);
    std::ifstream in(out_file, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    r.out = buf.str();
    std::remove(out_file.c_str());
    return r;
}

std::string scenario(const char* name) {
    return std::string(URLLC_SCENARIO_DIR) + "/" + name;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

std::string write_temp_scenario(const std::string& body) {
    const std::string path = "scenario_" + std::to_string(counter++) + ".json";
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

namespace {
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}
}  // namespace

TEST_CASE("dimension on the default scenario") {
    const auto r = run_cli("dimension --scenario " + scenario("default.json"));
    REQUIRE(r.exit_code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 2);
    CHECK(ls[0] ==
          "delta,kappa,mean_utilization_hz,utilization_variance_hz2,required_bandwidth_hz,"
          "safety_coefficient");
    // non-zero requirement for the shipped load, in the expected MHz range
    const auto cells = split_csv(ls[1]);
    REQUIRE(cells.size() == 6);
    const double w_min = std::stod(cells[4]);
    CHECK(w_min > 2.0e6);
    CHECK(w_min < 3.0e6);
}

TEST_CASE("dimension of a zero-load scenario is zero") {
    const std::string path = write_temp_scenario(R"({
      "schema": 1,
      "system": {"bandwidth_hz": 1.0e6, "kappa": 1.0, "classes": [
        {"arrival_rate_per_sec": 0.0, "payload_bits": 256, "sinr_db": 10.0,
         "deadline_sec": 1.0e-3, "reliability_eps": 1.0e-6}]}})");
    const auto r = run_cli("dimension --scenario " + path + " --format json");
    std::remove(path.c_str());
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["payload"]["required_bandwidth_hz"].get<double>() == 0.0);
}

TEST_CASE("dimension with optimize:mean equals the manually specified scheme") {
    const char* base = R"({
      "schema": 1,
      "system": {"bandwidth_hz": 3.0e6, "kappa": 1.0, "classes": [
        {"arrival_rate_per_sec": 1000.0, "payload_bits": 256, "sinr_db": 10.0,
         "deadline_sec": 1.0e-3, "reliability_eps": 1.0e-6, "feedback_delay_sec": 1.25e-4,
         "scheme": SCHEME}]}})";
    std::string opt = base;
    opt.replace(opt.find("SCHEME"), 6, "\"optimize:mean\"");
    const std::string p1 = write_temp_scenario(opt);
    const auto r1 = run_cli("dimension --scenario " + p1 + " --format json");
    REQUIRE(r1.exit_code == 0);
    const auto d1 = nlohmann::json::parse(r1.out)["payload"];

    // pin the scheme the optimizer chose and dimension again
    const int stages = d1["classes"][0]["stages"].get<int>();
    const double r_uses = d1["classes"][0]["blocklength"].get<double>();
    CHECK(stages > 1);
    std::string fixed = base;
    fixed.replace(fixed.find("SCHEME"), 6,
                  "{\"stages\": " + std::to_string(stages) +
                      ", \"blocklength\": " + std::to_string(r_uses) + "}");
    const std::string p2 = write_temp_scenario(fixed);
    const auto r2 = run_cli("dimension --scenario " + p2 + " --format json");
    std::remove(p1.c_str());
    std::remove(p2.c_str());
    REQUIRE(r2.exit_code == 0);
    const auto d2 = nlohmann::json::parse(r2.out)["payload"];
    CHECK(d1["required_bandwidth_hz"] == d2["required_bandwidth_hz"]);
}

TEST_CASE("capacity sweep") {
    SUBCASE("monotone lambda* in W") {
        const auto r = run_cli("capacity --scenario " + scenario("default.json") +
                               " --sweep W:1e6:8e6:4");
        REQUIRE(r.exit_code == 0);
        const auto ls = lines(r.out);
        REQUIRE(ls.size() == 5);
        CHECK(ls[0] == "sweep_var,lambda_star,diagnostic_ratio");
        double prev = 0.0;
        for (std::size_t i = 1; i < ls.size(); ++i) {
            const auto c1 = ls[i].find(',');
            const auto c2 = ls[i].find(',', c1 + 1);
            const double lam = std::stod(ls[i].substr(c1 + 1, c2 - c1 - 1));
            CHECK(lam > prev);
            prev = lam;
        }
    }
    SUBCASE("single-point sweep emits one row") {
        const auto r = run_cli("capacity --scenario " + scenario("default.json") +
                               " --sweep W:3e6:3e6:1");
        REQUIRE(r.exit_code == 0);
        CHECK(lines(r.out).size() == 2);
    }
    SUBCASE("multi-class scenario is rejected") {
        const auto r = run_cli("capacity --scenario " + scenario("two-class.json") +
                               " --sweep W:1e6:2e6:2");
        CHECK(r.exit_code == 2);
    }
}

TEST_CASE("optimize-harq regimes") {
    const auto r = run_cli("optimize-harq --scenario " + scenario("fig2-variance.json") +
                           " --regime variance --format json");
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    for (const auto& cls : doc["payload"]["best"]) CHECK(cls["stages"].get<int>() == 1);

    const auto rm = run_cli("optimize-harq --scenario " + scenario("fig3-mean.json") +
                            " --regime mean --format json");
    REQUIRE(rm.exit_code == 0);
    const auto docm = nlohmann::json::parse(rm.out);
    for (const auto& cls : docm["payload"]["best"]) CHECK(cls["stages"].get<int>() > 1);
}

TEST_CASE("blocking exact and split") {
    const auto r = run_cli("blocking --scenario " + scenario("two-class.json") + " --format json");
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["payload"]["state_count"].get<long long>() > 1);
    for (const auto& cls : doc["payload"]["classes"]) {
        const double b = cls["blocking"].get<double>();
        CHECK(b >= 0.0);
        CHECK(b <= 1.0);
    }

    // the shipped two-class scenario's first class carries load 2, so the
    // rho < 1 dominance hypothesis fails and is flagged
    const auto rs = run_cli("blocking --scenario " + scenario("two-class.json") +
                            " --split 2 --format json");
    REQUIRE(rs.exit_code == 0);
    const auto docs = nlohmann::json::parse(rs.out);
    CHECK(docs["payload"]["split_q"].get<int>() == 2);
    CHECK_FALSE(docs["payload"]["split_load_below_one"].get<bool>());

    // a light single class in a wide band: the split must dominate
    const std::string path = write_temp_scenario(R"({
      "schema": 1,
      "system": {"bandwidth_hz": 9.4e5, "kappa": 1.0, "classes": [
        {"arrival_rate_per_sec": 500.0, "payload_bits": 256, "sinr_db": 10.0,
         "deadline_sec": 1.0e-3, "reliability_eps": 1.0e-6}]}})");
    const auto rw = run_cli("blocking --scenario " + path + " --split 2 --format json");
    std::remove(path.c_str());
    REQUIRE(rw.exit_code == 0);
    const auto docw = nlohmann::json::parse(rw.out);
    CHECK(docw["payload"]["split_load_below_one"].get<bool>());
    for (const auto& cls : docw["payload"]["classes"])
        CHECK(cls["blocking_after"].get<double>() <=
              cls["blocking_before"].get<double>() + 1e-12);
}

TEST_CASE("simulate payload is byte-identical across runs") {
    const std::string cmd = "simulate --scenario " + scenario("two-class.json") + " --format json";
    const auto a = run_cli(cmd);
    const auto b = run_cli(cmd);
    REQUIRE(a.exit_code == 0);
    const auto da = nlohmann::json::parse(a.out);
    const auto db = nlohmann::json::parse(b.out);
    CHECK(da["payload"].dump() == db["payload"].dump());
    CHECK(da["scenario_digest"] == db["scenario_digest"]);

    // same for the CSV body
    const std::string csv_cmd = "simulate --scenario " + scenario("two-class.json");
    CHECK(run_cli(csv_cmd).out == run_cli(csv_cmd).out);

    // a different seed changes the payload
    const auto c = run_cli(cmd + " --seed 99");
    const auto dc = nlohmann::json::parse(c.out);
    CHECK(da["payload"].dump() != dc["payload"].dump());
}

TEST_CASE("simulate csv and trace") {
    const auto r = run_cli("simulate --scenario " + scenario("two-class.json") +
                           " --trace --out sim_out.csv");
    REQUIRE(r.exit_code == 0);
    std::ifstream csv("sim_out.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header.find("class,arrivals,delivered") == 0);
    std::ifstream trace("sim_out.csv.trace.csv");
    REQUIRE(trace.good());
    std::getline(trace, header);
    CHECK(header == "class,stage,start,end,outcome");
    std::string row;
    std::getline(trace, row);
    CHECK(!row.empty());
    std::remove("sim_out.csv");
    std::remove("sim_out.csv.trace.csv");
}

TEST_CASE("validate against exact") {
    const auto r = run_cli("validate --scenario " + scenario("two-class.json") + " --format json");
    REQUIRE(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["payload"]["pass"].get<bool>());
}

TEST_CASE("sweep emits the per-m table") {
    const auto r = run_cli("sweep --scenario " + scenario("fig2-variance.json") +
                           " --regime variance");
    REQUIRE(r.exit_code == 0);
    const auto ls = lines(r.out);
    CHECK(ls[0] == "class,m,r,s,h,p_stage,objective,feasible");
    CHECK(ls.size() == 1 + 5 * 8);  // 5 classes x m_max rows
}

TEST_CASE("exit codes") {
    SUBCASE("missing scenario file") {
        CHECK(run_cli("dimension --scenario does_not_exist.json").exit_code == 2);
    }
    SUBCASE("malformed scenario") {
        const std::string path = write_temp_scenario("{ not json");
        CHECK(run_cli("dimension --scenario " + path).exit_code == 2);
        std::remove(path.c_str());
    }
    SUBCASE("unknown key") {
        const std::string path = write_temp_scenario(R"({
          "schema": 1,
          "system": {"bandwidth_hz": 1e6, "kappa": 1.0, "typo_key": 3, "classes": [
            {"arrival_rate_per_sec": 1.0, "payload_bits": 256, "sinr_db": 10.0,
             "deadline_sec": 1e-3, "reliability_eps": 1e-6}]}})");
        CHECK(run_cli("dimension --scenario " + path).exit_code == 2);
        std::remove(path.c_str());
    }
    SUBCASE("usage error") {
        CHECK(run_cli("capacity --scenario " + scenario("default.json")).exit_code == 2);
        CHECK(run_cli("no-such-command").exit_code == 2);
    }
    SUBCASE("infeasible optimization") {
        const std::string path = write_temp_scenario(R"({
          "schema": 1,
          "system": {"bandwidth_hz": 10.0, "kappa": 1.0, "classes": [
            {"arrival_rate_per_sec": 1.0, "payload_bits": 2000, "sinr_db": 0.0,
             "deadline_sec": 1e-3, "reliability_eps": 1e-6, "feedback_delay_sec": 1e-4}]}})");
        CHECK(run_cli("optimize-harq --scenario " + path + " --regime mean").exit_code == 3);
        std::remove(path.c_str());
    }
    SUBCASE("state-space capacity error") {
        // W / h ~ 2e7 values per class exceeds the 1e7-state enumeration cap
        const std::string path = write_temp_scenario(R"({
          "schema": 1,
          "system": {"bandwidth_hz": 2.0e12, "kappa": 1.0, "classes": [
            {"arrival_rate_per_sec": 1.0, "payload_bits": 256, "sinr_db": 10.0,
             "deadline_sec": 1e-3, "reliability_eps": 1e-6}]}})");
        CHECK(run_cli("blocking --scenario " + path).exit_code == 4);
        std::remove(path.c_str());
    }
    SUBCASE("help exits zero") {
        CHECK(run_cli("--help").exit_code == 0);
    }
}
