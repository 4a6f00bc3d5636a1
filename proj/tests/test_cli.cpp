#include "erds/app.hpp"
#include "erds/config.hpp"

#include <nlohmann/json.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace erds;
namespace fs = std::filesystem;

namespace {

std::string config_path(const char* name) { return std::string(ERDS_CONFIG_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "erds");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_command(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("erds_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::vector<ConfigIssue> issues_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigParseError& e) {
        return e.issues;
    }
    return {};
}

bool mentions(const std::vector<ConfigIssue>& issues, const std::string& what, int line = 0) {
    for (const auto& i : issues) {
        if (i.message.find(what) != std::string::npos && (line == 0 || i.line == line)) return true;
    }
    return false;
}

const char* kMinimal = R"(scenario: torus
grid:
  n_cells: 16
initial:
  species:
    - {shape: cos, mean: 1, amp: 0.5}
    - {shape: constant, mean: 0.5}
  energy: {shape: cos, mean: 1, amp: 0.2}
run:
  dt: 0.01
  t_end: 0.1
)";

}  // namespace

TEST_CASE("config round trip and stable hash") {
    for (const char* name : {"torus_default.yaml", "confined_default.yaml"}) {
        CAPTURE(name);
        const Config c = load_config(config_path(name));
        const Config back = parse_config(emit_config(c));
        CHECK(back == c);
        CHECK(emit_config(back) == emit_config(c));
        CHECK(config_hash(back) == config_hash(c));
        CHECK(config_hash(c).size() == 16);
    }
    Config c = parse_config(kMinimal);
    CHECK(c.grid.n_cells == 16);
    CHECK(c.run.dt == 0.01);
    CHECK(c.initial.species[1].shape == "constant");
    const std::string h = config_hash(c);
    c.model.kappa = std::nextafter(c.model.kappa, 2.0);
    CHECK(config_hash(c) != h);
    CHECK(parse_config(emit_config(c)).model.kappa == c.model.kappa);
}

TEST_CASE("config errors are collected with locations") {
    const std::string text = R"(scenario: torus
grid:
  n_cells: 4
  n_cells: 16
model:
  c: 0
  bogus: 1
initial:
  species:
    - {shape: cos}
  energy: {shape: cos}
)";
    const auto issues = issues_of(text);
    CHECK(issues.size() >= 4);
    CHECK(mentions(issues, "duplicate key 'grid.n_cells'", 4));
    CHECK(mentions(issues, "unknown key 'model.bogus'", 7));
    CHECK(mentions(issues, "at least 8 cells", 3));
    CHECK(mentions(issues, "c > 0", 6));
    CHECK(mentions(issues, "species"));
    try {
        parse_config(text);
        FAIL("expected a parse error");
    } catch (const ConfigParseError& e) {
        CHECK(std::string(e.what()).find("line 4, column 3") != std::string::npos);
    }
}

TEST_CASE("config value checks") {
    CHECK(mentions(issues_of("scenario: sphere\n"), "scenario"));
    const auto syntax = issues_of("scenario: torus\ngrid: [1, 2\n");
    REQUIRE(syntax.size() == 1);
    CHECK(syntax[0].line > 0);
    CHECK(mentions(syntax, "syntax error"));
    std::string text = kMinimal;
    text += "  snapshots: [0, 5]\n";
    const auto snap = issues_of(text);
    CHECK(snap.size() == 1);
    CHECK(mentions(snap, "snapshot"));
    CHECK(issues_of(std::string(kMinimal) + "diagnostics:\n  eep: false\n").empty());
    CHECK(mentions(issues_of(std::string(kMinimal) + "network:\n  energy_exponent: 2\n"), "general scenario"));
    CHECK_THROWS_AS(load_config("/nonexistent/erds.yaml"), ConfigError);
}

TEST_CASE("sweep expands to the cartesian product") {
    const std::string text = std::string(kMinimal) + R"(sweep:
  model.kappa: [0.1, 0.2]
  model.c: [0.5, 1, 2]
)";
    const Config c = parse_config(text);
    const auto all = expand_sweep(c);
    REQUIRE(all.size() == 6);
    std::set<std::pair<double, double>> seen;
    std::set<std::string> hashes;
    for (const Config& x : all) {
        CHECK(x.sweep.empty());
        seen.insert({x.model.kappa, x.model.c});
        hashes.insert(config_hash(x));
    }
    CHECK(seen.size() == 6);
    CHECK(hashes.size() == 6);
    CHECK(seen.count({0.2, 2.0}) == 1);
    CHECK_THROWS_AS(expand_sweep(parse_config(std::string(kMinimal) + "sweep:\n  model.nope: [1]\n")), ConfigError);
}

TEST_CASE("run writes deterministic outputs") {
    const fs::path dir = scratch("run");
    std::ofstream(dir / "cfg.yaml") << kMinimal << "  snapshots: [0, 0.1]\n";
    REQUIRE(invoke({"run", (dir / "cfg.yaml").string(), "-o", (dir / "a").string()}) == 0);
    REQUIRE(invoke({"run", (dir / "cfg.yaml").string(), "-o", (dir / "b").string()}) == 0);
    for (const char* f : {"series.csv", "summary.json", "config.yaml", "snapshots/snapshot_000.csv",
                          "snapshots/snapshot_001.csv"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(dir / "a" / f));
        CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    const std::string csv = slurp(dir / "a" / "series.csv");
    CHECK(csv.rfind("t,H,P_total,P_n,P_p,P_e,P_R,mass_n,mass_p,mass_diff,energy,e_min,e_max,n_min,p_min\n", 0) == 0);
    const auto j = nlohmann::json::parse(slurp(dir / "a" / "summary.json"));
    CHECK(j["scenario"] == "torus");
    CHECK(j["steps"] == 10);
    CHECK(j["config_hash"] == config_hash(load_config((dir / "cfg.yaml").string())));
    CHECK(j["equilibrium"]["C_n"].get<double>() > 0.0);
    CHECK(j.contains("K_hat"));
    CHECK(j["final_L1"]["holds"] == true);
    // the stored config reproduces the run
    CHECK(load_config((dir / "a" / "config.yaml").string()) == load_config((dir / "cfg.yaml").string()));
}

TEST_CASE("exit codes") {
    const fs::path dir = scratch("codes");
    CHECK(invoke({"equilibrium", "--C0", "1.5", "--E0", "1", "--c", "1"}) == 0);
    CHECK(invoke({"equilibrium", "--C0", "1.5", "--E0", "0", "--c", "1"}) == 1);
    CHECK(invoke({"frobnicate"}) == 1);
    CHECK(invoke({"run", (dir / "missing.yaml").string()}) == 1);
    CHECK(invoke({"check-inequalities", "--samples", "200", "--seed", "3"}) == 0);
    CHECK(invoke({"constants", "--cells", "32", "--trials", "4"}) == 0);

    std::ofstream(dir / "invalid.yaml") << "scenario: torus\ngrid:\n  n_cells: 2\n";
    CHECK(invoke({"run", (dir / "invalid.yaml").string(), "-o", (dir / "x").string()}) == 1);

    // a homogeneous state so large that every halved step leaves the positive cone
    std::ofstream(dir / "blowup.yaml") << R"(scenario: torus
grid:
  n_cells: 32
initial:
  species:
    - {shape: constant, mean: 1e12}
    - {shape: constant, mean: 1e12}
  energy: {shape: cos, mean: 1, amp: 0.4}
run:
  dt: 1
  t_end: 1
diagnostics:
  eep: false
)";
    CHECK(invoke({"run", (dir / "blowup.yaml").string(), "-o", (dir / "y").string()}) == 2);
}

TEST_CASE("sweep subcommand runs every point") {
    const fs::path dir = scratch("sweep");
    std::string text = kMinimal;
    text += "output:\n  directory: " + (dir / "out").string() + "\nsweep:\n  model.kappa: [0.1, 0.2]\n";
    std::ofstream(dir / "sweep.yaml") << text;
    REQUIRE(invoke({"sweep", (dir / "sweep.yaml").string()}) == 0);
    std::size_t runs = 0;
    for (const auto& entry : fs::directory_iterator(dir / "out")) {
        CHECK(fs::exists(entry.path() / "summary.json"));
        ++runs;
    }
    CHECK(runs == 2);
}

TEST_CASE("analytic functional constants replace the trial-based estimate") {
    const std::string base = std::string(kMinimal) + "diagnostics:\n  per_record_log_sobolev: false\n";
    const Config c = parse_config(base + "  constants: [0.025330295910584444, 0.05066059182116889, 0.06]\n");
    CHECK(parse_config(emit_config(c)) == c);
    const RunOptions o = run_options(c);
    CHECK(o.diagnostics.constants_given);
    CHECK_FALSE(o.diagnostics.given.trial_based);
    const RunResult r = run(build_scenario(c), o);
    CHECK_FALSE(r.report.constants.trial_based);
    CHECK(r.report.constants.C_S == 0.06);
    CHECK(r.report.K_hat > 0.0);

    CHECK(mentions(issues_of(base + "  constants: [1, 2]\n"), "three positive numbers"));
    CHECK(mentions(issues_of(base + "  constants: [1, -2, 3]\n"), "three positive numbers"));
}
