#include "erds/entropy.hpp"

#include "erds/errors.hpp"

#include <cmath>
#include <string>

namespace erds {

SpatialFunctionPtr harmonic_potential(double strength, double offset) {
    auto f = std::make_shared<SpatialFunction>();
    f->value = [strength, offset](const Point& x) { return 0.5 * strength * (x[0] * x[0] + x[1] * x[1]) + offset; };
    f->gradient = [strength](const Point& x) { return Point{strength * x[0], strength * x[1]}; };
    return f;
}

SpatialFunctionPtr shifted(const SpatialFunctionPtr& g, double shift) {
    auto f = std::make_shared<SpatialFunction>();
    f->value = [g, shift](const Point& x) { return g->value(x) + shift; };
    f->gradient = g->gradient;
    return f;
}

SpatialFunctionPtr boltzmann_weight(const SpatialFunctionPtr& V) {
    auto f = std::make_shared<SpatialFunction>();
    f->value = [V](const Point& x) { return std::exp(-2.0 * V->value(x)); };
    f->gradient = [V](const Point& x) {
        const double w = std::exp(-2.0 * V->value(x));
        const Point g = V->gradient(x);
        return Point{-2.0 * w * g[0], -2.0 * w * g[1]};
    };
    return f;
}

void EntropyModel::validate() const {
    const std::size_t I = b.size();
    if (I == 0) throw ConfigError("entropy model needs at least one species");
    if (C.size() != I) throw ConfigError("entropy model: coef and b must have equal length");
    if (!V.empty() && V.size() != I) throw ConfigError("entropy model: one potential slot per species");
    for (std::size_t i = 0; i < I; ++i) {
        if (!(b[i] >= 0.0 && b[i] <= 1.0)) throw ConfigError("entropy model: exponents b_i must lie in [0,1]");
        if (!(C[i] > 0.0) || !std::isfinite(C[i])) throw ConfigError("entropy model: coefficients must be positive");
    }
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("entropy model: heat weight c must be non-negative");
    if (kind == EntropyKind::example1) {
        if (x_dependent()) throw ConfigError("example1 entropy has no spatial dependence");
        return;
    }
    if (heat == HeatForm::power) {
        if (!(sigma > 0.0 && sigma <= 1.0)) throw ConfigError("entropy model: sigma must lie in (0,1]");
        if (sigma == 1.0 && c > 0.0) throw ConfigError("entropy model: sigma = 1 gives a linear heat part; need sigma < 1");
    } else if (gamma) {
        throw ConfigError("entropy model: the logarithmic heat part takes no gamma weight");
    }
}

bool EntropyModel::x_dependent() const {
    if (gamma) return true;
    for (const auto& v : V) {
        if (v) return true;
    }
    return false;
}

double EntropyModel::log_coef(std::size_t i, const Point& x) const {
    double lc = std::log(C[i]);
    if (!V.empty() && V[i]) lc -= V[i]->value(x);
    return lc;
}

double EntropyModel::weight(std::size_t i, const Point& x, double e) const {
    return std::exp(log_coef(i, x) + b[i] * std::log(e));
}

double EntropyModel::heat_factor(const Point& x) const {
    if (kind == EntropyKind::example1) return 0.0;
    if (heat == HeatForm::log) return c;
    const double g = gamma ? gamma->value(x) : 1.0;
    return c * sigma * (sigma == 1.0 ? 1.0 : std::pow(g, 1.0 - sigma));
}

double EntropyModel::heat_shape(double e) const {
    if (kind == EntropyKind::example1) return 0.0;
    if (heat == HeatForm::log) return 1.0 / e;
    return sigma == 0.5 ? 1.0 / std::sqrt(e) : std::pow(e, sigma - 1.0);
}

double EntropyModel::heat_shape_secant(double a, double b) const {
    if (kind == EntropyKind::example1) return 0.0;
    if (heat == HeatForm::log) return -1.0 / (a * b);
    const double l = std::log(b / a);
    if (l == 0.0) return (sigma - 1.0) * std::pow(a, sigma - 2.0);
    return std::pow(a, sigma - 2.0) * std::expm1((sigma - 1.0) * l) / std::expm1(l);
}

double EntropyModel::heat_value(const Point& x, double e) const {
    if (kind == EntropyKind::example1) {
        double s = 0.0;
        for (double ci : C) s -= ci - 1.0;
        return s;
    }
    if (heat == HeatForm::log) return c * std::log(e);
    const double g = gamma ? gamma->value(x) : 1.0;
    return c * std::pow(e, sigma) * std::pow(g, 1.0 - sigma);
}

double EntropyModel::heat_d1(const Point& x, double e) const { return heat_factor(x) * heat_shape(e); }

double EntropyModel::heat_d2(const Point& x, double e) const {
    if (kind == EntropyKind::example1) return 0.0;
    if (heat == HeatForm::log) return -c / (e * e);
    return heat_factor(x) * (sigma - 1.0) * std::pow(e, sigma - 2.0);
}

EntropyModel torus_model(double c) {
    EntropyModel m;
    m.c = c;
    m.sigma = 0.5;
    m.b = {0.5, 0.5};
    m.C = {1.0, 1.0};
    m.validate();
    return m;
}

EntropyModel confined_model(double c, const SpatialFunctionPtr& V) {
    EntropyModel m = torus_model(c);
    m.V = {V, V};
    m.gamma = boltzmann_weight(V);
    m.validate();
    return m;
}

namespace {

constexpr double kLambdaFloor = 1e-12;

void check_point(const Eigen::VectorXd& u, double e, std::size_t I) {
    if (static_cast<std::size_t>(u.size()) != I) throw ArgumentError("density vector length does not match model");
    if (!(e > 0.0) || !std::isfinite(e)) throw DomainError("internal energy must be positive");
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (!(u[i] >= 0.0) || !std::isfinite(u[i])) throw DomainError("densities must be non-negative");
    }
}

void check_positive(const Eigen::VectorXd& u) {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (!(u[i] > 0.0)) throw DomainError("densities must be positive");
    }
}

}  // namespace

double boltzmann_lambda(double nu) {
    if (!(nu >= 0.0)) throw DomainError("boltzmann_lambda needs a non-negative argument");
    if (nu < kLambdaFloor) return 1.0 - nu;
    const double x = nu - 1.0;
    if (std::abs(x) < 1e-2) {
        // x^2/2 - x^3/6 + x^4/12 - ..., general term (-1)^k x^k / (k (k-1))
        double term = x * x;
        double sum = 0.0;
        for (int k = 2; k < 12; ++k) {
            sum += term / (k * (k - 1));
            term *= -x;
        }
        return sum;
    }
    return nu * std::log(nu) - nu + 1.0;
}

double entropy_density(const EntropyModel& model, const Point& x, const Eigen::VectorXd& u, double e) {
    const std::size_t I = model.species();
    check_point(u, e, I);
    if (model.kind == EntropyKind::example1) {
        double s = 0.0;
        for (std::size_t i = 0; i < I; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            s += model.b[i] * u[k] * std::log(e) - model.C[i] * boltzmann_lambda(u[k] / model.C[i]);
        }
        return s;
    }
    double s = model.heat_value(x, e);
    for (std::size_t i = 0; i < I; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double logw = model.log_coef(i, x) + model.b[i] * std::log(e);
        s -= boltzmann_lambda(u[k]) - (u[k] > 0.0 ? u[k] * logw : 0.0);
    }
    return s;
}

EntropyGradient entropy_gradient(const EntropyModel& model, const Point& x, const Eigen::VectorXd& u, double e) {
    const std::size_t I = model.species();
    check_point(u, e, I);
    check_positive(u);
    EntropyGradient g;
    g.du.resize(u.size());
    g.de = model.heat_d1(x, e);
    for (std::size_t i = 0; i < I; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        g.du[k] = -std::log(u[k]) + model.log_coef(i, x) + model.b[i] * std::log(e);
        g.de += u[k] * model.b[i] / e;
    }
    if (!(g.de > 0.0)) throw NumericalError("entropy gradient: d S / d e must be positive");
    return g;
}

Eigen::MatrixXd entropy_hessian(const EntropyModel& model, const Point& x, const Eigen::VectorXd& u, double e) {
    const std::size_t I = model.species();
    check_point(u, e, I);
    check_positive(u);
    const auto n = static_cast<Eigen::Index>(I);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n + 1, n + 1);
    double corner = model.heat_d2(x, e);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double bi = model.b[static_cast<std::size_t>(i)];
        H(i, i) = -1.0 / u[i];
        H(i, n) = bi / e;
        H(n, i) = bi / e;
        corner -= u[i] * bi / (e * e);
    }
    H(n, n) = corner;
    return H;
}

double mobility_scalar_M(const EntropyModel& model, const Point& x, const Eigen::VectorXd& u, double e) {
    check_point(u, e, model.species());
    double M = -e * e * model.heat_d2(x, e);
    for (std::size_t i = 0; i < model.species(); ++i) {
        M += u[static_cast<Eigen::Index>(i)] * (model.b[i] - model.b[i] * model.b[i]);
    }
    if (!(M > 1e-300)) throw NumericalError("degenerate mobility: M(u,e) vanishes");
    return M;
}

Eigen::MatrixXd mobility_tensor(const EntropyModel& model, const Point& x, const Eigen::VectorXd& u, double e,
                                double kappa) {
    if (!(kappa > 0.0)) throw DomainError("mobility tensor needs kappa > 0");
    const double M = mobility_scalar_M(model, x, u, e);
    const auto n = u.size();
    Eigen::VectorXd db(n);
    for (Eigen::Index i = 0; i < n; ++i) db[i] = u[i] * model.b[static_cast<std::size_t>(i)];
    Eigen::MatrixXd A(n + 1, n + 1);
    A.topLeftCorner(n, n) = Eigen::MatrixXd(u.asDiagonal()) + db * db.transpose() / M;
    A.topRightCorner(n, 1) = e * db / M;
    A.bottomLeftCorner(1, n) = e * db.transpose() / M;
    A(n, n) = e * e / M;
    A *= kappa;

    const Eigen::MatrixXd prod = -A * entropy_hessian(model, x, u, e);
    const Eigen::MatrixXd target = kappa * Eigen::MatrixXd::Identity(n + 1, n + 1);
    if ((prod - target).norm() > 1e-8 * (1.0 + target.norm()) * (1.0 + A.norm())) {
        throw NumericalError("mobility tensor fails the inverse check");
    }
    return A;
}

}  // namespace erds
