#include "erds/secant_mobility.hpp"

#include "erds/errors.hpp"
#include "erds/reaction_network.hpp"

#include <cmath>

namespace erds {

CellModelData sample_model(const EntropyModel& model, const Grid& grid) {
    CellModelData d;
    d.x_dependent = model.x_dependent();
    d.heat_factor = grid.sample_with([&](const Point& x) { return model.heat_factor(x); });
    d.log_coef.reserve(model.species());
    for (std::size_t i = 0; i < model.species(); ++i) {
        d.log_coef.push_back(grid.sample_with([&](const Point& x) { return model.log_coef(i, x); }));
    }
    return d;
}

double inverse_mean_gap(double ea, double eb) {
    const double m = 0.5 * (ea + eb);
    const double t = (eb - ea) / (ea + eb);
    if (std::abs(t) < 1e-3) {
        // -(1/(2 m^2)) sum_k 2k/(2k+1) t^{2k-1}
        double sum = 0.0;
        double tk = t;
        for (int k = 1; k < 8; ++k) {
            sum += (2.0 * k) / (2.0 * k + 1.0) * tk;
            tk *= t * t;
        }
        return -sum / (2.0 * m * m);
    }
    return (std::atanh(t) / t - 1.0 / (1.0 - t * t)) / (2.0 * m * m * t);
}

FaceSecant face_secant(const EntropyModel& model, const Eigen::VectorXd& ua, const Eigen::VectorXd& ub, double ea,
                       double eb, double heat_factor_mean) {
    const auto I = ua.size();
    FaceSecant B;
    B.diag.resize(I);
    B.border.resize(I);
    const double le = lambda_mean(ea, eb);
    const double psi = inverse_mean_gap(ea, eb);
    double corner = -heat_factor_mean * model.heat_shape_secant(ea, eb);
    double scale = std::abs(corner);
    for (Eigen::Index i = 0; i < I; ++i) {
        const double bi = model.b[static_cast<std::size_t>(i)];
        const double lu = lambda_mean(ua[i], ub[i]);
        if (!(lu > 0.0)) throw DomainError("secant mobility needs positive densities");
        B.diag[i] = 1.0 / lu;
        B.border[i] = -bi / le;
        const double term = bi * ((ub[i] - ua[i]) * psi + 0.5 * (ua[i] + ub[i]) / (ea * eb));
        corner += term;
        scale += std::abs(term);
    }
    B.corner = corner;
    double schur = corner;
    for (Eigen::Index i = 0; i < I; ++i) schur -= B.border[i] * B.border[i] / B.diag[i];
    B.schur = schur;
    B.schur_scale = scale;
    return B;
}

Eigen::VectorXd secant_solve(const FaceSecant& B, const Eigen::VectorXd& r) {
    const auto I = B.diag.size();
    double re = r[I];
    for (Eigen::Index i = 0; i < I; ++i) re -= B.border[i] * r[i] / B.diag[i];
    Eigen::VectorXd y(I + 1);
    y[I] = re / B.schur;
    for (Eigen::Index i = 0; i < I; ++i) y[i] = (r[i] - B.border[i] * y[I]) / B.diag[i];
    return y;
}

SecantQuadratic secant_quadratic(const FaceSecant& B, const Eigen::VectorXd& r) {
    const auto I = B.diag.size();
    SecantQuadratic q;
    q.species.resize(I);
    double re = r[I];
    for (Eigen::Index i = 0; i < I; ++i) {
        q.species[i] = r[i] * r[i] / B.diag[i];
        re -= B.border[i] * r[i] / B.diag[i];
    }
    q.energy = re * re / B.schur;
    return q;
}

Eigen::VectorXd face_spatial_jump(const EntropyModel& model, const CellModelData& data, std::size_t a, std::size_t b,
                                  double ea, double eb) {
    const auto I = static_cast<Eigen::Index>(model.species());
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    Eigen::VectorXd r(I + 1);
    for (Eigen::Index i = 0; i < I; ++i) {
        const Field& lc = data.log_coef[static_cast<std::size_t>(i)];
        r[i] = lc[ib] - lc[ia];
    }
    r[I] = (data.heat_factor[ib] - data.heat_factor[ia]) * 0.5 * (model.heat_shape(ea) + model.heat_shape(eb));
    return r;
}

Eigen::VectorXd face_entropy_jump(const EntropyModel& model, const CellModelData& data, std::size_t a, std::size_t b,
                                  const Eigen::VectorXd& ua, const Eigen::VectorXd& ub, double ea, double eb) {
    const auto I = static_cast<Eigen::Index>(model.species());
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    const double dlog_e = std::log(eb) - std::log(ea);
    Eigen::VectorXd r(I + 1);
    double de = data.heat_factor[ib] * model.heat_shape(eb) - data.heat_factor[ia] * model.heat_shape(ea);
    for (Eigen::Index i = 0; i < I; ++i) {
        const double bi = model.b[static_cast<std::size_t>(i)];
        if (!(ua[i] > 0.0 && ub[i] > 0.0)) throw DomainError("entropy jump needs positive densities");
        const Field& lc = data.log_coef[static_cast<std::size_t>(i)];
        r[i] = -(std::log(ub[i]) - std::log(ua[i])) + (lc[ib] - lc[ia]) + bi * dlog_e;
        de += bi * (ub[i] / eb - ua[i] / ea);
    }
    r[I] = de;
    return r;
}

}  // namespace erds
