#pragma once

#include "erds/grid.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace erds {

// Scalar field with its gradient, e.g. a confining potential V(x).
struct SpatialFunction {
    std::function<double(const Point&)> value;
    std::function<Point(const Point&)> gradient;
};

using SpatialFunctionPtr = std::shared_ptr<const SpatialFunction>;

// V(x) = strength * |x|^2 / 2 + offset
SpatialFunctionPtr harmonic_potential(double strength, double offset);
SpatialFunctionPtr shifted(const SpatialFunctionPtr& f, double shift);
// exp(-2 V(x)), the stationary energy profile of a confining potential
SpatialFunctionPtr boltzmann_weight(const SpatialFunctionPtr& V);

enum class EntropyKind { example1, example2 };
enum class HeatForm { power, log };

// Entropy densities of the form
//   example2:  S(x,u,e) = s(x,e) - sum_i (lambda_B(u_i) - u_i log w_i(x,e))
//   example1:  S(u,e)   = sum_i (b_i u_i log e - C_i lambda_B(u_i / C_i))
// with w_i(x,e) = C_i exp(-V_i(x)) e^{b_i} and s(x,e) = c e^sigma gamma(x)^{1-sigma}
// or s = c log e.
struct EntropyModel {
    EntropyKind kind = EntropyKind::example2;
    HeatForm heat = HeatForm::power;
    double c = 1.0;
    double sigma = 0.5;
    std::vector<double> b;
    std::vector<double> C;                  // example1: reference densities u_*
    std::vector<SpatialFunctionPtr> V;      // per species, null for none
    SpatialFunctionPtr gamma;               // null means gamma = 1

    std::size_t species() const { return b.size(); }
    void validate() const;
    bool x_dependent() const;

    double log_coef(std::size_t i, const Point& x) const;
    double weight(std::size_t i, const Point& x, double e) const;

    double heat_value(const Point& x, double e) const;
    double heat_d1(const Point& x, double e) const;
    double heat_d2(const Point& x, double e) const;
    // s'(x,e) factors as heat_factor(x) * heat_shape(e).
    double heat_factor(const Point& x) const;
    double heat_shape(double e) const;
    // (h(b) - h(a)) / (b - a), with the derivative as the limit.
    double heat_shape_secant(double a, double b) const;
};

// c sqrt(e) heat part with w_i = sqrt(e): the periodic model.
EntropyModel torus_model(double c);
// c sqrt(e) exp(-V) heat part with w_i = exp(-V) sqrt(e): the confined model.
EntropyModel confined_model(double c, const SpatialFunctionPtr& V);

double boltzmann_lambda(double nu);

double entropy_density(const EntropyModel& model, const Point& x, const Eigen::VectorXd& u, double e);

struct EntropyGradient {
    Eigen::VectorXd du;
    double de = 0.0;
};

EntropyGradient entropy_gradient(const EntropyModel& model, const Point& x, const Eigen::VectorXd& u, double e);

// D^2 S in the ordering (u_1, ..., u_I, e).
Eigen::MatrixXd entropy_hessian(const EntropyModel& model, const Point& x, const Eigen::VectorXd& u, double e);

// M(u,e) = -e^2 s''(e) + sum_i u_i (b_i - b_i^2)
double mobility_scalar_M(const EntropyModel& model, const Point& x, const Eigen::VectorXd& u, double e);

// -kappa (D^2 S)^{-1} from the closed-form block inverse.
Eigen::MatrixXd mobility_tensor(const EntropyModel& model, const Point& x, const Eigen::VectorXd& u, double e,
                                double kappa);

}  // namespace erds
