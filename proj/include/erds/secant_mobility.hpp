#pragma once

#include "erds/entropy.hpp"
#include "erds/grid.hpp"

#include <Eigen/Dense>

#include <vector>

namespace erds {

// Spatial data of an entropy model sampled at cell centres.
struct CellModelData {
    Field heat_factor;               // s'(x,e) = heat_factor(x) * heat_shape(e)
    std::vector<Field> log_coef;     // log(C_i) - V_i(x)
    bool x_dependent = false;
};

CellModelData sample_model(const EntropyModel& model, const Grid& grid);

// Exact secant of -D^2 S across one face: B (z_b - z_a) = -(DS(x, z_b) - DS(x, z_a)) with the spatial
// dependence frozen at the face mean. B is an arrow matrix: diagonal on the densities, a border
// coupling each density to e, and a corner.
struct FaceSecant {
    Eigen::VectorXd diag;    // 1 / Lambda(u_a, u_b)
    Eigen::VectorXd border;  // -b_i / Lambda(e_a, e_b)
    double corner = 0.0;
    double schur = 0.0;      // corner - sum border^2 / diag
    double schur_scale = 0.0;
};

FaceSecant face_secant(const EntropyModel& model, const Eigen::VectorXd& ua, const Eigen::VectorXd& ub, double ea,
                       double eb, double heat_factor_mean);

// B^{-1} r
Eigen::VectorXd secant_solve(const FaceSecant& B, const Eigen::VectorXd& r);
// r . B^{-1} r split into the density diagonal terms (one per species) and the energy term.
struct SecantQuadratic {
    Eigen::VectorXd species;
    double energy = 0.0;
};
SecantQuadratic secant_quadratic(const FaceSecant& B, const Eigen::VectorXd& r);

// Spatial part of the jump of DS across the face: log-coefficient jumps for the densities and
// (g_b - g_a) times the mean of heat_shape(e_a), heat_shape(e_b) for the energy.
Eigen::VectorXd face_spatial_jump(const EntropyModel& model, const CellModelData& data, std::size_t a, std::size_t b,
                                  double ea, double eb);

// Full jump of DS(x, u, e) between the two cells.
Eigen::VectorXd face_entropy_jump(const EntropyModel& model, const CellModelData& data, std::size_t a, std::size_t b,
                                  const Eigen::VectorXd& ua, const Eigen::VectorXd& ub, double ea, double eb);

// (1/Lambda(e_a,e_b) - (1/e_a + 1/e_b)/2) / (e_b - e_a), continuous at e_a = e_b.
double inverse_mean_gap(double ea, double eb);

}  // namespace erds
