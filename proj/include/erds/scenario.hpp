#pragma once

#include "erds/entropy.hpp"
#include "erds/equilibrium.hpp"
#include "erds/grid.hpp"
#include "erds/reaction_network.hpp"

#include <memory>
#include <vector>

namespace erds {

enum class ScenarioKind { torus, confined, general };

struct Scenario {
    ScenarioKind kind = ScenarioKind::torus;
    GridPtr grid;
    EntropyModel model;
    ReactionNetwork network;
    RateLaw rate;  // the bipolar law for torus and confined scenarios
    double kappa = 1.0;
    StateField initial;
    double dt = 0.0;  // 0 selects default_time_step
    double t_end = 0.0;
    int cadence = 1;  // steps between records
    std::vector<double> snapshot_times;
    SpatialFunctionPtr potential;  // confined: the confining potential as given

    // Filled by finalize_scenario.
    std::shared_ptr<const EquilibriumState> equilibrium;
    double e_lower = 0.0;  // bounds of e0 (torus) or e0/e* (confined)
    double e_upper = 0.0;
};

// Initial profile mean + amp * shape(x). Periodic shapes use cos(2 pi m x) on the torus and
// cos(m pi (x + L) / (2L)) on the box; in 2D the shape is the product over both axes.
struct ProfileSpec {
    enum class Shape { constant, cos, sin, step, tanh };
    Shape shape = Shape::constant;
    double mean = 1.0;
    double amp = 0.0;
    int mode = 1;
};

Field sample_profile(const Grid& grid, const ProfileSpec& spec);

// Confined scenarios take the profiles relative to the normalized exp(-2V) and rescale e to unit mass;
// the other kinds use the profiles directly.
StateField initial_state(ScenarioKind kind, const GridPtr& grid, const SpatialFunctionPtr& potential,
                         const std::vector<ProfileSpec>& densities, const ProfileSpec& energy);

// Validates the scenario and computes its equilibrium and initial energy bounds.
void finalize_scenario(Scenario& s);

// 0.1 h / sqrt(kappa), capped by 0.5 / (k_max (|n|_inf + |p|_inf)).
double default_time_step(const Scenario& s, const StateField& state);

}  // namespace erds
