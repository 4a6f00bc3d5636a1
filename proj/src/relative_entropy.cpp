#include "erds/relative_entropy.hpp"

#include "erds/errors.hpp"

#include <cmath>

namespace erds {

namespace {

constexpr double kLogFloor = 1e-300;

// x log(x / y) with its continuous extension 0 for x below the floor.
double xlogxy(double x, double y) {
    if (x < kLogFloor) return 0.0;
    return x * (std::log(x) - std::log(y));
}

// w lambda_B(u / w)
double weighted_lambda(double u, double w) { return w * boltzmann_lambda(u / w); }

void require_bipolar(const StateField& s, const EquilibriumState& eq) {
    s.validate();
    if (s.species() != 2 || eq.u_star.size() != 2) throw ArgumentError("bipolar relative entropy needs two species");
}

}  // namespace

double power_bregman(double b, double r) {
    const double x = r - 1.0;
    if (std::abs(x) < 1e-3) {
        // -sum_{k>=2} binom(b, k) x^k
        double coef = b * (b - 1.0) / 2.0;
        double xk = x * x;
        double sum = 0.0;
        for (int k = 2; k < 10; ++k) {
            sum -= coef * xk;
            coef *= (b - k) / (k + 1.0);
            xk *= x;
        }
        return sum;
    }
    return b * x - std::expm1(b * std::log(r));
}

double relative_entropy_torus(const StateField& state, const EquilibriumState& eq, const EntropyModel& model) {
    require_bipolar(state, eq);
    const Grid& g = *state.grid;
    const double K = model.c + eq.C_n + eq.C_p;
    double H = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double es = eq.e_at(k);
        const double se = std::sqrt(state.e[i]);
        const double sse = std::sqrt(es);
        H += weighted_lambda(state.u[0][i], eq.C_n * se) + weighted_lambda(state.u[1][i], eq.C_p * se) +
             K / (2.0 * sse) * (se - sse) * (se - sse);
    }
    return H * g.cell_volume();
}

double relative_entropy_torus_defining(const StateField& state, const EquilibriumState& eq,
                                       const EntropyModel& model) {
    require_bipolar(state, eq);
    const Grid& g = *state.grid;
    auto S = [&](double n, double p, double e) {
        const double lw = 0.5 * std::log(e);
        double s = model.c * std::sqrt(e) - boltzmann_lambda(n) - boltzmann_lambda(p);
        if (n > 0.0) s += n * (std::log(eq.C_n) + lw);
        if (p > 0.0) s += p * (std::log(eq.C_p) + lw);
        return s;
    };
    double H = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double es = eq.e_at(k);
        H += -S(state.u[0][i], state.u[1][i], state.e[i]) + S(eq.u_at(0, k), eq.u_at(1, k), es) +
             eq.Sigma_e * (state.e[i] - es);
    }
    return H * g.cell_volume();
}

double relative_entropy_average_split(const StateField& state, const EquilibriumState& eq,
                                      const EntropyModel& model) {
    require_bipolar(state, eq);
    const Grid& g = *state.grid;
    const double nbar = g.integrate(state.u[0]);
    const double pbar = g.integrate(state.u[1]);
    double H = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double es = eq.e_at(k);
        const double n = state.u[0][i], p = state.u[1][i], e = state.e[i];
        const double se = std::sqrt(e), sse = std::sqrt(es);
        H += 0.5 * xlogxy(n, nbar) + 0.5 * xlogxy(n, nbar * e / es);
        H += 0.5 * xlogxy(p, pbar) + 0.5 * xlogxy(p, pbar * e / es);
        H += model.c / (2.0 * sse) * (se - sse) * (se - sse);
    }
    H *= g.cell_volume();
    // Spatial averages of the equilibrium densities.
    double ns = 0.0, ps = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        ns += eq.u_at(0, k);
        ps += eq.u_at(1, k);
    }
    ns *= g.cell_volume();
    ps *= g.cell_volume();
    return H + ns * boltzmann_lambda(nbar / ns) + ps * boltzmann_lambda(pbar / ps);
}

double relative_entropy_confined(const StateField& state, const EquilibriumState& eq, const EntropyModel& model) {
    require_bipolar(state, eq);
    const Grid& g = *state.grid;
    const double K = model.c + eq.C_n + eq.C_p;
    double H = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double es = eq.e_at(k);
        const double root = std::sqrt(state.e[i] * es);
        const double d = std::sqrt(state.e[i]) - std::sqrt(es);
        H += weighted_lambda(state.u[0][i], eq.C_n * root) + weighted_lambda(state.u[1][i], eq.C_p * root) +
             0.5 * K * d * d;
    }
    return H * g.cell_volume();
}

GeneralRelativeEntropy relative_entropy_general(const StateField& state, const EquilibriumState& eq,
                                                const EntropyModel& model) {
    state.validate();
    const std::size_t I = model.species();
    if (state.species() != I || eq.ctilde.size() != I) throw ArgumentError("species count mismatch");
    const Grid& g = *state.grid;
    GeneralRelativeEntropy out;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto cell = static_cast<Eigen::Index>(k);
        const Point x = g.center(k);
        const double e = state.e[cell];
        const double es = eq.e_at(k);
        const double r = e / es;
        for (std::size_t i = 0; i < I; ++i) {
            const double ct = eq.ctilde[i];
            const double w = ct * model.weight(i, x, e);
            out.density += weighted_lambda(state.u[i][cell], w);
            // ct C_i coef(x) e*^b * (b r - r^b + 1 - b)
            out.weights += ct * model.weight(i, x, es) * power_bregman(model.b[i], r);
        }
        if (model.kind == EntropyKind::example2) {
            if (model.heat == HeatForm::log) {
                out.heat += model.c * (r - 1.0 - std::log(r));
            } else {
                out.heat += model.heat_value(x, es) * power_bregman(model.sigma, r);
            }
        }
    }
    out.density *= g.cell_volume();
    out.weights *= g.cell_volume();
    out.heat *= g.cell_volume();
    return out;
}

}  // namespace erds
