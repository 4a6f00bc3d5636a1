#pragma once

#include "erds/entropy.hpp"
#include "erds/errors.hpp"
#include "erds/grid.hpp"
#include "erds/reaction_network.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace erds {

struct EquilibriumState {
    // One entry for spatially constant states, one per cell otherwise.
    Field e_star;
    std::vector<Field> u_star;
    // u*_i = ctilde_i * w_i(x, e*); for the bipolar scenarios C_n, C_p are the
    // effective prefactors ctilde_i * C_i.
    std::vector<double> ctilde;
    double C_n = 1.0;
    double C_p = 1.0;
    double Sigma_e = 0.0;
    Eigen::VectorXd Sigma_u;  // density multipliers, an element of the conserved subspace
    double E0 = 0.0;
    Eigen::VectorXd Cons0;
    Field V;  // normalized potential on the grid (confined case only)

    int iterations = 0;
    double constraint_residual = 0.0;
    double stationarity_residual = 0.0;

    double e_at(std::size_t cell) const { return e_star.size() == 1 ? e_star[0] : e_star[static_cast<Eigen::Index>(cell)]; }
    double u_at(std::size_t i, std::size_t cell) const {
        const Field& f = u_star[i];
        return f.size() == 1 ? f[0] : f[static_cast<Eigen::Index>(cell)];
    }
};

struct EquilibriumNotConverged : NumericalError {
    EquilibriumNotConverged(const std::string& what, EquilibriumState best_iterate)
        : NumericalError(what), best(std::move(best_iterate)) {}
    EquilibriumState best;
};

// Positive root of C^2 - q C - 1 = 0, evaluated without cancellation.
double positive_root_unit_product(double q);

EquilibriumState solve_torus_equilibrium(double C0, double E0, double c);

// e* = exp(-2V) normalized to unit mass on the grid, n* = C_n e*, p* = C_p e*.
EquilibriumState confined_equilibrium(const GridPtr& grid, const SpatialFunctionPtr& V, double C0, double c);

// Returns the shift s such that V + s has unit Boltzmann mass on the grid; checks the tail
// mass outside the box against 1e-6.
double potential_normalization_shift(const Grid& grid, const SpatialFunction& V);

struct MaxEntropyOptions {
    int max_iterations = 100;
    double constraint_tol = 1e-12;
    double stationarity_tol = 1e-10;
    // Starting multipliers; empty means zero density multipliers and a homogeneous guess.
    Eigen::VectorXd start;
};

// Maximizes the integral of S subject to P * int u = Cons0 and int e = E0 by Newton's method
// on the Lagrange multipliers.
EquilibriumState general_max_entropy(const EntropyModel& model, const ReactionNetwork& network,
                                     const Eigen::VectorXd& Cons0, double E0, const GridPtr& grid,
                                     const MaxEntropyOptions& options = {});

// Multipliers of a converged solution in the coordinates used by `MaxEntropyOptions::start`.
Eigen::VectorXd multiplier_coordinates(const EquilibriumState& eq, const ReactionNetwork& network);

}  // namespace erds
