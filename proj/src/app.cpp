#include "erds/app.hpp"

#include "erds/diagnostics.hpp"
#include "erds/equilibrium.hpp"
#include "erds/inequalities.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace erds {

namespace fs = std::filesystem;

namespace {

std::string g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string snapshot_csv(const Snapshot& snap) {
    const Grid& g = *snap.state.grid;
    std::ostringstream os;
    os << "x";
    if (g.dim() == 2) os << ",y";
    for (std::size_t i = 0; i < snap.state.species(); ++i) os << ",u" << i;
    os << ",e\n";
    for (std::size_t c = 0; c < g.size(); ++c) {
        const Point x = g.center(c);
        os << g17(x[0]);
        if (g.dim() == 2) os << ',' << g17(x[1]);
        for (const auto& u : snap.state.u) os << ',' << g17(u[static_cast<Eigen::Index>(c)]);
        os << ',' << g17(snap.state.e[static_cast<Eigen::Index>(c)]) << '\n';
    }
    return os.str();
}

const char* kind_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::torus: return "torus";
        case ScenarioKind::confined: return "confined";
        default: return "general";
    }
}

std::string worker_label(const Config& c) {
    std::ostringstream os;
    os << config_hash(c) << " " << c.scenario << " N=" << c.grid.n_cells << " kappa=" << g17(c.model.kappa);
    return os.str();
}

}  // namespace

std::string series_csv(const RunResult& result) {
    std::ostringstream os;
    os << "t,H,P_total,P_n,P_p,P_e,P_R,mass_n,mass_p,mass_diff,energy,e_min,e_max,n_min,p_min\n";
    for (const Record& r : result.report.series) {
        const double row[] = {r.t,      r.H,      r.P.P_total, r.P.P_n,     r.P.P_p,  r.P.P_e,  r.P.P_R, r.mass_n,
                              r.mass_p, r.mass_diff, r.energy, r.e_min, r.e_max, r.n_min, r.p_min};
        for (std::size_t k = 0; k < std::size(row); ++k) os << (k ? "," : "") << g17(row[k]);
        os << '\n';
    }
    return os.str();
}

std::string summary_json(const Config& config, const Scenario& scenario, const RunResult& result) {
    const DiagnosticsReport& rep = result.report;
    const EquilibriumState& eq = *scenario.equilibrium;
    nlohmann::ordered_json j;
    j["scenario"] = kind_name(scenario.kind);
    j["config_hash"] = config_hash(config);
    j["steps"] = result.steps;
    j["rejected_steps"] = result.rejected;
    j["t_final"] = result.t_final;
    j["records"] = rep.series.size();
    j["K_formula"] = rep.K_formula;
    j["K_hat"] = rep.K_hat;
    j["k_fit"] = rep.k_fit;
    j["r_squared"] = rep.r_squared;
    j["max_dissipation_residual"] = rep.max_dissipation_residual;
    j["eep_worst_ratio"] = rep.eep_worst_ratio;
    j["decay_bound_ratio"] = rep.decay_bound_ratio;
    j["ckp_prefactor"] = rep.ckp_prefactor;
    j["final_L1"] = {{"n", rep.final_L1.l1_n},
                     {"p", rep.final_L1.l1_p},
                     {"sqrt_e", rep.final_L1.l2_sqrt_e},
                     {"bound_C", rep.final_L1.C},
                     {"H", rep.final_L1.H},
                     {"holds", rep.final_L1.holds}};
    j["constants"] = {{"C_P", rep.constants.C_P},
                      {"C_LS", rep.constants.C_LS},
                      {"C_S", rep.constants.C_S},
                      {"trial_based", rep.constants.trial_based}};
    j["equilibrium"] = {{"C_n", eq.C_n},       {"C_p", eq.C_p},         {"Sigma_e", eq.Sigma_e},
                        {"E0", eq.E0},         {"iterations", eq.iterations},
                        {"constraint_residual", eq.constraint_residual}};
    j["flags"] = rep.flags;
    j["config"] = emit_config(config);
    return j.dump(2) + "\n";
}

void write_run_outputs(const std::string& dir, const Config& config, const Scenario& scenario, const RunResult& result) {
    const fs::path root(dir);
    fs::create_directories(root);
    write_file(root / "config.yaml", emit_config(config));
    const auto& formats = config.output.formats;
    const bool csv = std::find(formats.begin(), formats.end(), "csv") != formats.end();
    const bool json = std::find(formats.begin(), formats.end(), "json") != formats.end();
    if (csv) {
        write_file(root / "series.csv", series_csv(result));
        if (!result.snapshots.empty()) {
            fs::create_directories(root / "snapshots");
            for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
                char name[32];
                std::snprintf(name, sizeof name, "snapshot_%03zu.csv", k);
                write_file(root / "snapshots" / name,
                           "# t = " + g17(result.snapshots[k].t) + "\n" + snapshot_csv(result.snapshots[k]));
            }
        }
    }
    if (json) write_file(root / "summary.json", summary_json(config, scenario, result));
}

namespace {

struct RunOutcome {
    int code = exit_ok;
    std::string message;
    std::string directory;
    double K_hat = 0.0;
    double k_fit = 0.0;
};

RunOutcome execute(const Config& config, const std::string& dir_override) {
    RunOutcome out;
    try {
        const Scenario scenario = build_scenario(config);
        const RunResult result = run(scenario, run_options(config));
        out.directory = dir_override.empty() ? (fs::path(config.output.directory) / config_hash(config)).string()
                                             : dir_override;
        write_run_outputs(out.directory, config, scenario, result);
        out.K_hat = result.report.K_hat;
        out.k_fit = result.report.k_fit;
        std::ostringstream os;
        os << result.steps << " steps, H " << g17(result.report.series.front().H) << " -> "
           << g17(result.report.series.back().H) << ", k_fit " << g17(result.report.k_fit) << ", K_hat "
           << g17(result.report.K_hat) << ", EEP worst ratio " << g17(result.report.eep_worst_ratio);
        out.message = os.str();
    } catch (const RunFailure& e) {
        out.code = exit_numerical;
        out.message = std::string("numerical failure at t = ") + g17(e.t) + ": " + e.what();
    } catch (const NumericalError& e) {
        out.code = exit_numerical;
        out.message = std::string("numerical failure: ") + e.what();
    } catch (const std::exception& e) {
        out.code = exit_invalid;
        out.message = e.what();
    }
    return out;
}

int command_run(const std::string& path, const std::string& dir) {
    Config config;
    try {
        config = load_config(path);
    } catch (const ConfigError& e) {
        std::cerr << path << ": " << e.what() << '\n';
        return exit_invalid;
    }
    const RunOutcome r = execute(config, dir);
    if (r.code != exit_ok) {
        std::cerr << "erds run: " << r.message << '\n';
        return r.code;
    }
    std::cout << r.directory << '\n' << r.message << '\n';
    return exit_ok;
}

unsigned worker_count() {
    if (const char* env = std::getenv("ERDS_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int command_sweep(const std::string& path) {
    std::vector<Config> configs;
    try {
        configs = expand_sweep(load_config(path));
    } catch (const ConfigError& e) {
        std::cerr << path << ": " << e.what() << '\n';
        return exit_invalid;
    }
    std::vector<RunOutcome> outcomes(configs.size());
    std::atomic<std::size_t> next{0};
    std::mutex io;
    auto worker = [&] {
        for (std::size_t k; (k = next++) < configs.size();) {
            outcomes[k] = execute(configs[k], "");
            const std::lock_guard<std::mutex> lock(io);
            std::cout << "[" << k + 1 << "/" << configs.size() << "] " << worker_label(configs[k]) << ": "
                      << (outcomes[k].code == exit_ok ? outcomes[k].message : "FAILED " + outcomes[k].message) << '\n';
        }
    };
    const unsigned n = std::min<unsigned>(worker_count(), static_cast<unsigned>(configs.size()));
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    int code = exit_ok;
    for (const auto& o : outcomes) code = std::max(code, o.code);
    return code;
}

int command_equilibrium(double C0, double E0, double c) {
    try {
        const EquilibriumState eq = solve_torus_equilibrium(C0, E0, c);
        std::cout << "C_n = " << g17(eq.C_n) << "\nC_p = " << g17(eq.C_p) << "\nSigma_e = " << g17(eq.Sigma_e)
                  << "\nn* = " << g17(eq.u_star[0][0]) << "\np* = " << g17(eq.u_star[1][0])
                  << "\ne* = " << g17(eq.e_star[0]) << '\n';
    } catch (const NumericalError& e) {
        std::cerr << "erds equilibrium: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "erds equilibrium: " << e.what() << '\n';
        return exit_invalid;
    }
    return exit_ok;
}

int command_inequalities(std::size_t samples, std::uint64_t seed) {
    const SuiteReport rep = run_inequality_suite(samples, seed);
    std::printf("seed %llu\n", static_cast<unsigned long long>(rep.seed));
    std::printf("%-18s %10s %10s %14s  %s\n", "inequality", "samples", "violations", "worst margin", "branch hits");
    for (const auto& e : rep.entries) {
        std::string hits;
        for (std::size_t h : e.branch_hits) hits += (hits.empty() ? "" : " ") + std::to_string(h);
        std::printf("%-18s %10zu %10zu %14.6e  %s\n", e.name.c_str(), e.samples, e.violations, e.worst_margin,
                    hits.empty() ? "-" : hits.c_str());
    }
    return rep.all_hold() ? exit_ok : exit_numerical;
}

int command_constants(int dim, int cells, double half_width, double strength, int trials, std::uint64_t seed) {
    try {
        GridPtr grid;
        Field weight;
        if (half_width > 0.0) {
            grid = Grid::box(dim, cells, half_width);
            const auto V = harmonic_potential(strength, 0.0);
            const double shift = potential_normalization_shift(*grid, *V);
            weight = grid->sample_with([&](const Point& x) { return std::exp(-2.0 * (V->value(x) + shift)); });
        } else {
            grid = Grid::torus(dim, cells);
        }
        ConstantOptions opt;
        opt.random_trials = trials;
        opt.seed = seed;
        const FunctionalConstants fc = estimate_functional_constants(*grid, weight.size() ? &weight : nullptr, opt);
        std::cout << "C_P = " << g17(fc.C_P) << "\nC_LS = " << g17(fc.C_LS) << "\nC_S = " << g17(fc.C_S)
                  << "\ntrial_based = " << (fc.trial_based ? "true" : "false") << '\n';
    } catch (const NumericalError& e) {
        std::cerr << "erds constants: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "erds constants: " << e.what() << '\n';
        return exit_invalid;
    }
    return exit_ok;
}

}  // namespace

int run_command(int argc, char** argv) {
    CLI::App app{"Entropy-dissipating reaction-diffusion simulations and diagnostics", "erds"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    auto* run_cmd = app.add_subcommand("run", "Run one scenario and write series.csv and summary.json");
    run_cmd->add_option("config", config_path, "Scenario config (YAML)")->required();
    run_cmd->add_option("-o,--output", out_dir, "Output directory (default: output.directory/<config hash>)");

    double C0 = 0.0, E0 = 1.0, c = 1.0;
    auto* eq_cmd = app.add_subcommand("equilibrium", "Print the homogeneous torus equilibrium");
    eq_cmd->add_option("--C0", C0, "Conserved value of the integral of n - p")->required();
    eq_cmd->add_option("--E0", E0, "Total energy")->required();
    eq_cmd->add_option("--c", c, "Heat weight")->required();

    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    auto* ineq_cmd = app.add_subcommand("check-inequalities", "Randomized check of the functional inequalities");
    ineq_cmd->add_option("--samples", samples, "Samples per inequality")->check(CLI::PositiveNumber);
    ineq_cmd->add_option("--seed", seed, "Random seed");

    std::string sweep_path;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run the cartesian grid of a config's sweep block in parallel");
    sweep_cmd->add_option("config", sweep_path, "Scenario config with a sweep block")->required();

    int dim = 1, cells = 256, trials = 48;
    double half_width = 0.0, strength = 1.0;
    std::uint64_t const_seed = 1;
    auto* const_cmd = app.add_subcommand("constants", "Estimate Poincare, log-Sobolev and Sobolev constants");
    const_cmd->add_option("--dim", dim, "Dimension (1 or 2)");
    const_cmd->add_option("--cells", cells, "Cells per axis");
    const_cmd->add_option("--half-width", half_width, "Box half width; 0 selects the unit torus");
    const_cmd->add_option("--strength", strength, "Strength of the harmonic confinement on the box");
    const_cmd->add_option("--trials", trials, "Random trial functions");
    const_cmd->add_option("--seed", const_seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_invalid;
    }

    if (*run_cmd) return command_run(config_path, out_dir);
    if (*eq_cmd) return command_equilibrium(C0, E0, c);
    if (*ineq_cmd) return command_inequalities(samples, seed);
    if (*sweep_cmd) return command_sweep(sweep_path);
    return command_constants(dim, cells, half_width, strength, trials, const_seed);
}

}  // namespace erds
