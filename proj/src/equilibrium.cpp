#include "erds/equilibrium.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace erds {

double positive_root_unit_product(double q) {
    const double r = std::hypot(q, 2.0);
    return q >= 0.0 ? 0.5 * (q + r) : 2.0 / (r - q);
}

EquilibriumState solve_torus_equilibrium(double C0, double E0, double c) {
    if (!(E0 > 0.0) || !std::isfinite(E0)) throw DomainError("total energy E0 must be positive");
    if (!std::isfinite(C0)) throw DomainError("C0 must be finite");
    if (!(c >= 0.0)) throw DomainError("heat weight c must be non-negative");
    EquilibriumState eq;
    const double se = std::sqrt(E0);
    eq.C_n = positive_root_unit_product(C0 / se);
    eq.C_p = 1.0 / eq.C_n;
    eq.ctilde = {eq.C_n, eq.C_p};
    eq.e_star = Field::Constant(1, E0);
    eq.u_star = {Field::Constant(1, eq.C_n * se), Field::Constant(1, eq.C_p * se)};
    eq.Sigma_e = (eq.C_n + eq.C_p + c) / (2.0 * se);
    eq.Sigma_u = Eigen::VectorXd::Zero(2);
    eq.E0 = E0;
    eq.Cons0 = Eigen::Vector2d(0.5 * C0, -0.5 * C0);
    return eq;
}

double potential_normalization_shift(const Grid& grid, const SpatialFunction& V) {
    double inside = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) inside += std::exp(-2.0 * V.value(grid.center(i)));
    inside *= grid.cell_volume();
    if (!(inside > 0.0) || !std::isfinite(inside)) throw ConfigError("potential gives no finite Boltzmann mass on the grid");

    if (grid.domain() == Domain::box) {
        // Same spacing on a box three times as wide.
        const int n = grid.n_cells();
        const double h = grid.h();
        const double L = 3.0 * grid.half_width();
        const int m = 3 * n;
        double total = 0.0;
        const int ny = grid.dim() == 1 ? 1 : m;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < m; ++i) {
                Point x{-L + (i + 0.5) * h, grid.dim() == 1 ? 0.0 : -L + (j + 0.5) * h};
                total += std::exp(-2.0 * V.value(x));
            }
        }
        total *= grid.cell_volume();
        if (!std::isfinite(total) || (total - inside) > 1e-10 * total) {
            throw ConfigError("potential is not confining enough: Boltzmann mass outside the box exceeds 1e-10");
        }
    }
    return 0.5 * std::log(inside);
}

EquilibriumState confined_equilibrium(const GridPtr& grid, const SpatialFunctionPtr& V, double C0, double c) {
    if (!grid || !V) throw ArgumentError("confined equilibrium needs a grid and a potential");
    if (!std::isfinite(C0)) throw DomainError("C0 must be finite");
    if (!(c >= 0.0)) throw DomainError("heat weight c must be non-negative");
    const double shift = potential_normalization_shift(*grid, *V);
    EquilibriumState eq;
    eq.V = grid->sample_with([&](const Point& x) { return V->value(x) + shift; });
    eq.e_star = (-2.0 * eq.V.array()).exp().matrix();
    eq.C_n = positive_root_unit_product(C0);
    eq.C_p = 1.0 / eq.C_n;
    eq.ctilde = {eq.C_n, eq.C_p};
    eq.u_star = {eq.C_n * eq.e_star, eq.C_p * eq.e_star};
    eq.Sigma_e = 0.5 * (eq.C_n + eq.C_p + c);
    eq.Sigma_u = Eigen::VectorXd::Zero(2);
    eq.E0 = 1.0;
    eq.Cons0 = Eigen::Vector2d(0.5 * C0, -0.5 * C0);
    return eq;
}

namespace {

struct CellData {
    Point x;
    std::vector<double> coef;  // C_i exp(-V_i(x))
    double g = 0.0;            // s'(x,e) = g h(e)
};

struct EnergyRoot {
    double e = 0.0;
    double dG = 0.0;  // dG/de < 0
    double residual = 0.0;
};

class MaxEntropyProblem {
public:
    MaxEntropyProblem(const EntropyModel& model, const GridPtr& grid, const Eigen::MatrixXd& Q)
        : model_(model), grid_(grid), Q_(Q) {
        const std::size_t I = model.species();
        cells_.resize(grid->size());
        for (std::size_t k = 0; k < grid->size(); ++k) {
            auto& c = cells_[k];
            c.x = grid->center(k);
            c.coef.resize(I);
            for (std::size_t i = 0; i < I; ++i) c.coef[i] = std::exp(model.log_coef(i, c.x));
            c.g = model.heat_factor(c.x);
        }
    }

    // G(e) = s'(x,e) + sum_i ct_i w_i'(x,e) - Sigma_e at one cell, and its derivative.
    std::pair<double, double> G(const CellData& c, const Eigen::VectorXd& ct, double Se, double e) const {
        double val = c.g * model_.heat_shape(e) - Se;
        double der = c.g * shape_derivative(e);
        for (std::size_t i = 0; i < static_cast<std::size_t>(ct.size()); ++i) {
            const double b = model_.b[i];
            if (b == 0.0) continue;
            const double wi = ct[static_cast<Eigen::Index>(i)] * c.coef[i] * b * std::pow(e, b - 1.0);
            val += wi;
            der += wi * (b - 1.0) / e;
        }
        return {val, der};
    }

    std::optional<EnergyRoot> energy_root(const CellData& c, const Eigen::VectorXd& ct, double Se, double guess) const {
        double lo = guess, hi = guess;
        auto [g0, d0] = G(c, ct, Se, guess);
        if (g0 == 0.0) return EnergyRoot{guess, d0, 0.0};
        if (g0 > 0.0) {
            for (int k = 0;; ++k) {
                if (k > 2000 || !std::isfinite(hi)) return std::nullopt;
                hi *= 2.0;
                if (G(c, ct, Se, hi).first <= 0.0) break;
                lo = hi;
            }
        } else {
            for (int k = 0;; ++k) {
                if (k > 2000 || !(lo > 1e-300)) return std::nullopt;
                lo *= 0.5;
                if (G(c, ct, Se, lo).first >= 0.0) break;
                hi = lo;
            }
        }
        // Safeguarded Newton in log e.
        double t = 0.5 * (std::log(lo) + std::log(hi));
        double tl = std::log(lo), th = std::log(hi);
        for (int it = 0; it < 200; ++it) {
            const double e = std::exp(t);
            const auto [val, der] = G(c, ct, Se, e);
            if (val > 0.0) tl = t; else th = t;
            if (std::abs(val) <= 1e-15 * std::abs(Se) || th - tl < 1e-15) {
                return EnergyRoot{e, der, std::abs(val) / std::abs(Se)};
            }
            double tn = t - val / (der * e);
            if (!(tn > tl && tn < th)) tn = 0.5 * (tl + th);
            t = tn;
        }
        const double e = std::exp(t);
        const auto [val, der] = G(c, ct, Se, e);
        return EnergyRoot{e, der, std::abs(val) / std::abs(Se)};
    }

    struct Evaluation {
        bool feasible = false;
        Eigen::VectorXd F;
        Eigen::MatrixXd J;
        double dual = 0.0;
        double stationarity = 0.0;
        Eigen::VectorXd ct;
        std::vector<Field> u;
        Field e;
    };

    Evaluation evaluate(const Eigen::VectorXd& y, const Eigen::VectorXd& Cons0, double E0,
                        const Field* guess) const {
        const auto m = Q_.cols();
        const auto I = static_cast<Eigen::Index>(model_.species());
        const Eigen::VectorXd lam = y.head(m);
        const double Se = y[m];
        Evaluation ev;
        ev.ct = (-(Q_ * lam)).array().exp().matrix();
        ev.e.resize(static_cast<Eigen::Index>(grid_->size()));
        ev.u.assign(static_cast<std::size_t>(I), Field(static_cast<Eigen::Index>(grid_->size())));
        Eigen::VectorXd intu = Eigen::VectorXd::Zero(I);
        double inte = 0.0;
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m + 1, m + 1);
        const double vol = grid_->cell_volume();
        const double e_guess = E0 / grid_->measure();
        double dual = 0.0;
        const Eigen::VectorXd Qlam = Q_ * lam;
        for (std::size_t k = 0; k < cells_.size(); ++k) {
            const auto& c = cells_[k];
            const auto kk = static_cast<Eigen::Index>(k);
            const auto root = energy_root(c, ev.ct, Se, guess ? (*guess)[kk] : e_guess);
            if (!root) return ev;
            const double e = root->e;
            ev.stationarity = std::max(ev.stationarity, root->residual);
            ev.e[kk] = e;
            Eigen::VectorXd u(I), wprime(I);
            for (Eigen::Index i = 0; i < I; ++i) {
                const double b = model_.b[static_cast<std::size_t>(i)];
                u[i] = ev.ct[i] * c.coef[static_cast<std::size_t>(i)] * std::pow(e, b);
                wprime[i] = b * u[i] / e;
                ev.u[static_cast<std::size_t>(i)][kk] = u[i];
            }
            intu += u * vol;
            inte += e * vol;
            // Implicit derivatives of the cell energy.
            Eigen::VectorXd de(m + 1);
            de.head(m) = Q_.transpose() * wprime / root->dG;
            de[m] = 1.0 / root->dG;
            Eigen::MatrixXd du(I, m + 1);
            du.leftCols(m) = -(u.asDiagonal() * Q_);
            du.col(m).setZero();
            du += wprime * de.transpose();
            J.topRows(m) += vol * Q_.transpose() * du;
            J.row(m) += vol * de.transpose();
            dual += vol * (entropy_density(model_, c.x, u, e) - Qlam.dot(u) - Se * e);
        }
        ev.F.resize(m + 1);
        ev.F.head(m) = Q_.transpose() * (intu - Cons0);
        ev.F[m] = inte - E0;
        ev.J = J;
        ev.dual = dual + lam.dot(Q_.transpose() * Cons0) + Se * E0;
        ev.feasible = std::isfinite(ev.dual) && ev.F.allFinite();
        return ev;
    }

private:
    double shape_derivative(double e) const {
        if (model_.kind == EntropyKind::example1) return 0.0;
        if (model_.heat == HeatForm::log) return -1.0 / (e * e);
        return (model_.sigma - 1.0) * std::pow(e, model_.sigma - 2.0);
    }

    const EntropyModel& model_;
    GridPtr grid_;
    Eigen::MatrixXd Q_;
    std::vector<CellData> cells_;
};

}  // namespace

EquilibriumState general_max_entropy(const EntropyModel& model, const ReactionNetwork& network,
                                     const Eigen::VectorXd& Cons0, double E0, const GridPtr& grid,
                                     const MaxEntropyOptions& options) {
    model.validate();
    if (!grid) throw ArgumentError("general_max_entropy needs a grid");
    if (!(E0 > 0.0) || !std::isfinite(E0)) throw DomainError("total energy E0 must be positive");
    const auto I = static_cast<Eigen::Index>(model.species());
    if (network.species_count() != model.species() || Cons0.size() != I) {
        throw ArgumentError("species count differs between model, network and constraint vector");
    }
    if ((network.projection() * Cons0 - Cons0).norm() > 1e-10 * (1.0 + Cons0.norm())) {
        throw ArgumentError("constraint vector is not in the conserved subspace");
    }
    const Eigen::MatrixXd Q = network.conserved_basis();
    const auto m = Q.cols();
    MaxEntropyProblem problem(model, grid, Q);

    Eigen::VectorXd y(m + 1);
    if (options.start.size() == m + 1) {
        y = options.start;
    } else {
        y.setZero();
        // Homogeneous guess for the energy multiplier.
        const double eh = E0 / grid->measure();
        double s = 0.0;
        for (std::size_t k = 0; k < grid->size(); ++k) {
            const Point x = grid->center(k);
            s += model.heat_d1(x, eh);
            for (std::size_t i = 0; i < model.species(); ++i) s += model.b[i] * model.weight(i, x, eh) / eh;
        }
        y[m] = s / static_cast<double>(grid->size());
    }

    auto ev = problem.evaluate(y, Cons0, E0, nullptr);
    if (!ev.feasible) throw NumericalError("maximum-entropy start point is infeasible");

    auto scale_u = [&](const MaxEntropyProblem::Evaluation& v) {
        double s = 1.0;
        for (Eigen::Index i = 0; i < Cons0.size(); ++i) s = std::max(s, std::abs(Cons0[i]));
        for (const auto& f : v.u) s = std::max(s, grid->integrate(f));
        return s;
    };
    auto converged = [&](const MaxEntropyProblem::Evaluation& v) {
        const bool cu = m == 0 || v.F.head(m).cwiseAbs().maxCoeff() <= options.constraint_tol * scale_u(v);
        const bool ce = std::abs(v.F[m]) <= options.constraint_tol * std::max(1.0, E0);
        return cu && ce && v.stationarity <= options.stationarity_tol;
    };
    auto package = [&](const MaxEntropyProblem::Evaluation& v, const Eigen::VectorXd& yy, int iters) {
        EquilibriumState eq;
        eq.e_star = v.e;
        eq.u_star = v.u;
        eq.ctilde.assign(v.ct.data(), v.ct.data() + v.ct.size());
        eq.Sigma_u = Q * yy.head(m);
        eq.Sigma_e = yy[m];
        eq.E0 = E0;
        eq.Cons0 = Cons0;
        eq.iterations = iters;
        eq.constraint_residual = v.F.cwiseAbs().maxCoeff();
        eq.stationarity_residual = v.stationarity;
        if (I == 2) {
            eq.C_n = eq.ctilde[0] * model.C[0];
            eq.C_p = eq.ctilde[1] * model.C[1];
        }
        return eq;
    };

    for (int it = 0; it < options.max_iterations; ++it) {
        if (converged(ev)) return package(ev, y, it);
        const Eigen::VectorXd step = ev.J.fullPivLu().solve(-ev.F);
        if (!step.allFinite()) throw EquilibriumNotConverged("singular Newton system", package(ev, y, it));
        double t = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 30; ++halving, t *= 0.5) {
            const Eigen::VectorXd yn = y + t * step;
            auto evn = problem.evaluate(yn, Cons0, E0, &ev.e);
            if (!evn.feasible) continue;
            const bool dual_ok = evn.dual <= ev.dual + 1e-13 * (1.0 + std::abs(ev.dual));
            const bool res_ok = evn.F.norm() < ev.F.norm();
            if (dual_ok || res_ok) {
                y = yn;
                ev = std::move(evn);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (converged(ev)) return package(ev, y, it);
            throw EquilibriumNotConverged("Newton damping exhausted 30 halvings", package(ev, y, it));
        }
    }
    if (converged(ev)) return package(ev, y, options.max_iterations);
    throw EquilibriumNotConverged("maximum-entropy Newton did not converge in the iteration budget",
                                  package(ev, y, options.max_iterations));
}

Eigen::VectorXd multiplier_coordinates(const EquilibriumState& eq, const ReactionNetwork& network) {
    const Eigen::MatrixXd Q = network.conserved_basis();
    Eigen::VectorXd y(Q.cols() + 1);
    y.head(Q.cols()) = Q.transpose() * eq.Sigma_u;
    y[Q.cols()] = eq.Sigma_e;
    return y;
}

}  // namespace erds
