#pragma once

#include "erds/errors.hpp"
#include "erds/scenario.hpp"
#include "erds/simulator.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace erds {

struct ProfileConfig {
    std::string shape = "constant";  // constant | cos | sin | step | tanh
    double mean = 1.0;
    double amp = 0.0;
    int mode = 1;
    bool operator==(const ProfileConfig&) const = default;
};

struct ReactionConfig {
    std::vector<int> alpha;
    std::vector<int> beta;
    bool operator==(const ReactionConfig&) const = default;
};

struct GridConfig {
    int dim = 1;
    int n_cells = 256;
    double half_width = 6.0;  // box only
    bool operator==(const GridConfig&) const = default;
};

struct ModelConfig {
    double kappa = 1.0;
    double c = 1.0;
    double potential_strength = 1.0;  // V = strength |x|^2 / 2 + offset, confined presets only
    double potential_offset = 0.0;
    // general scenarios: torus | confined | custom
    std::string preset = "torus";
    std::string entropy = "example2";
    std::string heat = "power";
    double sigma = 0.5;
    std::vector<double> b;
    std::vector<double> C;
    bool operator==(const ModelConfig&) const = default;
};

struct NetworkConfig {
    std::string law = "constant";  // constant | read_shockley_hall
    double k = 1.0;
    double k0 = 1.0;
    double c_n = 0.0;
    double c_p = 0.0;
    double energy_exponent = 1.0;
    std::vector<ReactionConfig> reactions;  // empty: n + p <-> 0
    bool operator==(const NetworkConfig&) const = default;
};

struct InitialConfig {
    std::vector<ProfileConfig> species;
    ProfileConfig energy;
    bool operator==(const InitialConfig&) const = default;
};

struct RunConfig {
    double dt = 0.0;  // 0 picks the default step
    double t_end = 1.0;
    int cadence = 1;
    std::uint64_t seed = 1;
    std::vector<double> snapshots;
    bool operator==(const RunConfig&) const = default;
};

struct DiagnosticsConfig {
    bool eep = true;
    bool per_record_log_sobolev = true;
    int constant_trials = 48;
    int search_rounds = 6;
    std::vector<double> constants;  // [C_P, C_LS, C_S] to skip the trial-based estimate
    bool operator==(const DiagnosticsConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "runs";
    std::vector<std::string> formats{"csv", "json"};
    bool operator==(const OutputConfig&) const = default;
};

struct Config {
    std::string scenario = "torus";  // torus | confined | general
    GridConfig grid;
    ModelConfig model;
    NetworkConfig network;
    InitialConfig initial;
    RunConfig run;
    DiagnosticsConfig diagnostics;
    OutputConfig output;
    // dotted key -> list of values, expanded as a cartesian product
    std::map<std::string, std::vector<std::string>> sweep;
    bool operator==(const Config&) const = default;
};

struct ConfigIssue {
    int line = 0;  // 1-based, 0 when not tied to a location
    int column = 0;
    std::string message;
};

struct ConfigParseError : ConfigError {
    explicit ConfigParseError(std::vector<ConfigIssue> list);
    std::vector<ConfigIssue> issues;
};

// Collects every syntax and semantic problem before throwing.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);
// Full-precision YAML; parse_config(emit_config(c)) == c.
std::string emit_config(const Config& config);

// One config per point of the sweep grid, with the sweep block removed.
std::vector<Config> expand_sweep(const Config& config);
// FNV-1a of the emitted config, as 16 hex digits.
std::string config_hash(const Config& config);

// Finalized scenario ready for run().
Scenario build_scenario(const Config& config);
RunOptions run_options(const Config& config);

}  // namespace erds
