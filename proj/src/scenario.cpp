#include "erds/scenario.hpp"

#include "erds/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace erds {

Field sample_profile(const Grid& grid, const ProfileSpec& spec) {
    const double L = grid.half_width();
    const bool torus = grid.domain() == Domain::torus;
    auto axis_shape = [&](double x, bool sine) {
        const double arg = torus ? 2.0 * M_PI * spec.mode * x : spec.mode * M_PI * (x + L) / (2.0 * L);
        return sine ? std::sin(arg) : std::cos(arg);
    };
    return grid.sample_with([&](const Point& x) {
        double v = 0.0;
        switch (spec.shape) {
            case ProfileSpec::Shape::constant: v = 0.0; break;
            case ProfileSpec::Shape::cos:
            case ProfileSpec::Shape::sin: {
                const bool sine = spec.shape == ProfileSpec::Shape::sin;
                v = axis_shape(x[0], sine);
                if (grid.dim() == 2) v *= axis_shape(x[1], sine);
                break;
            }
            case ProfileSpec::Shape::step: {
                double c = axis_shape(x[0], false);
                if (grid.dim() == 2) c *= axis_shape(x[1], false);
                v = c > 0.0 ? 1.0 : (c < 0.0 ? -1.0 : 0.0);
                break;
            }
            case ProfileSpec::Shape::tanh:
                v = std::tanh(spec.mode * x[0]);
                if (grid.dim() == 2) v *= std::tanh(spec.mode * x[1]);
                break;
        }
        return spec.mean + spec.amp * v;
    });
}

StateField initial_state(ScenarioKind kind, const GridPtr& grid, const SpatialFunctionPtr& potential,
                         const std::vector<ProfileSpec>& densities, const ProfileSpec& energy) {
    if (!grid) throw ConfigError("initial state needs a grid");
    StateField s;
    s.grid = grid;
    if (kind == ScenarioKind::confined) {
        if (!potential) throw ConfigError("confined initial data needs a potential");
        const double shift = potential_normalization_shift(*grid, *potential);
        const Field es = grid->sample_with([&](const Point& x) { return std::exp(-2.0 * (potential->value(x) + shift)); });
        for (const auto& d : densities) s.u.push_back(es.cwiseProduct(sample_profile(*grid, d)));
        s.e = es.cwiseProduct(sample_profile(*grid, energy));
        const double mass = grid->integrate(s.e);
        if (!(mass > 0.0)) throw ConfigError("initial energy has no positive mass");
        s.e /= mass;
    } else {
        for (const auto& d : densities) s.u.push_back(sample_profile(*grid, d));
        s.e = sample_profile(*grid, energy);
    }
    try {
        s.validate();
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("initial data: ") + ex.what());
    }
    return s;
}

void finalize_scenario(Scenario& s) {
    if (!s.grid) throw ConfigError("scenario has no grid");
    if (!(s.kappa > 0.0) || !std::isfinite(s.kappa)) throw ConfigError("kappa must be positive");
    if (!(s.t_end >= 0.0) || !std::isfinite(s.t_end)) throw ConfigError("t_end must be non-negative");
    if (!(s.dt >= 0.0) || !std::isfinite(s.dt)) throw ConfigError("dt must be non-negative");
    if (s.cadence < 1) throw ConfigError("output cadence must be at least 1");
    s.rate.validate();
    if (s.initial.grid != s.grid) throw ConfigError("initial state lives on a different grid");
    s.initial.validate();
    const Grid& g = *s.grid;

    switch (s.kind) {
        case ScenarioKind::torus: {
            if (g.domain() != Domain::torus) throw ConfigError("torus scenario needs a periodic grid");
            if (s.initial.species() != 2) throw ConfigError("torus scenario has two species");
            s.model.validate();
            if (s.network.species_count() == 0) s.network = bipolar_network(s.rate);
            const double C0 = g.integrate(s.initial.u[0] - s.initial.u[1]);
            const double E0 = g.integrate(s.initial.e);
            s.equilibrium = std::make_shared<EquilibriumState>(solve_torus_equilibrium(C0, E0, s.model.c));
            break;
        }
        case ScenarioKind::confined: {
            if (g.domain() != Domain::box) throw ConfigError("confined scenario needs a box grid");
            if (!s.potential) throw ConfigError("confined scenario needs a potential");
            if (s.initial.species() != 2) throw ConfigError("confined scenario has two species");
            if (s.network.species_count() == 0) s.network = bipolar_network(s.rate);
            const double C0 = g.integrate(s.initial.u[0] - s.initial.u[1]);
            const double E0 = g.integrate(s.initial.e);
            if (std::abs(E0 - 1.0) > 1e-10) throw ConfigError("confined scenario needs initial energy of unit mass");
            const double shift = potential_normalization_shift(g, *s.potential);
            s.model = confined_model(s.model.c, shifted(s.potential, shift));
            s.equilibrium = std::make_shared<EquilibriumState>(confined_equilibrium(s.grid, s.potential, C0, s.model.c));
            break;
        }
        case ScenarioKind::general: {
            s.model.validate();
            if (s.network.species_count() != s.model.species() || s.initial.species() != s.model.species()) {
                throw ConfigError("model, network and initial state disagree on the species count");
            }
            Eigen::VectorXd total(static_cast<Eigen::Index>(s.model.species()));
            for (std::size_t i = 0; i < s.model.species(); ++i) total[static_cast<Eigen::Index>(i)] = g.integrate(s.initial.u[i]);
            const Eigen::VectorXd Cons0 = s.network.projection() * total;
            const double E0 = g.integrate(s.initial.e);
            s.equilibrium = std::make_shared<EquilibriumState>(general_max_entropy(s.model, s.network, Cons0, E0, s.grid));
            break;
        }
    }
    const EquilibriumState& eq = *s.equilibrium;
    s.e_lower = std::numeric_limits<double>::infinity();
    s.e_upper = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double r = s.initial.e[static_cast<Eigen::Index>(k)] / (s.kind == ScenarioKind::torus ? 1.0 : eq.e_at(k));
        s.e_lower = std::min(s.e_lower, r);
        s.e_upper = std::max(s.e_upper, r);
    }
}

double default_time_step(const Scenario& s, const StateField& state) {
    double dt = 0.1 * s.grid->h() / std::sqrt(s.kappa);
    double umax = 0.0;
    for (const auto& u : state.u) umax += u.cwiseAbs().maxCoeff();
    const double kmax = s.rate.upper_bound();
    if (kmax * umax > 0.0) dt = std::min(dt, 0.5 / (kmax * umax));
    return dt;
}

}  // namespace erds
