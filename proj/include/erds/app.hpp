#pragma once

#include "erds/config.hpp"
#include "erds/simulator.hpp"

#include <string>

namespace erds {

enum ExitCode { exit_ok = 0, exit_invalid = 1, exit_numerical = 2 };

// Entry point of the erds command line tool.
int run_command(int argc, char** argv);

// Writes series.csv, summary.json, config.yaml and snapshots/ under `dir`.
void write_run_outputs(const std::string& dir, const Config& config, const Scenario& scenario, const RunResult& result);

std::string series_csv(const RunResult& result);
std::string summary_json(const Config& config, const Scenario& scenario, const RunResult& result);

}  // namespace erds
