#include "erds/simulator.hpp"

#include "erds/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace erds {

double bernoulli_fn(double x) {
    if (std::abs(x) < 1e-6) return 1.0 - 0.5 * x + x * x / 12.0;
    return x / std::expm1(x);
}

Eigen::SparseMatrix<double> laplacian_operator(const Grid& grid, double kappa) {
    const auto N = static_cast<Eigen::Index>(grid.size());
    const double a = kappa / (grid.h() * grid.h());
    std::vector<Eigen::Triplet<double>> trip;
    for (const Face& f : grid.faces()) {
        const auto lo = static_cast<Eigen::Index>(f.lo);
        const auto hi = static_cast<Eigen::Index>(f.hi);
        trip.emplace_back(lo, lo, -a);
        trip.emplace_back(hi, hi, -a);
        trip.emplace_back(lo, hi, a);
        trip.emplace_back(hi, lo, a);
    }
    Eigen::SparseMatrix<double> L(N, N);
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

Eigen::SparseMatrix<double> fitted_drift_operator(const Grid& grid, const EquilibriumState& eq, double kappa) {
    const auto N = static_cast<Eigen::Index>(grid.size());
    const double a = kappa / (grid.h() * grid.h());
    std::vector<Eigen::Triplet<double>> trip;
    for (const Face& f : grid.faces()) {
        const auto lo = static_cast<Eigen::Index>(f.lo);
        const auto hi = static_cast<Eigen::Index>(f.hi);
        // phi = -log e*, flux (B(-dphi) q_hi - B(dphi) q_lo) / h
        const double dphi = std::log(eq.e_at(f.lo)) - std::log(eq.e_at(f.hi));
        const double bp = bernoulli_fn(dphi);
        const double bm = bernoulli_fn(-dphi);
        trip.emplace_back(lo, hi, a * bm);
        trip.emplace_back(lo, lo, -a * bp);
        trip.emplace_back(hi, hi, -a * bm);
        trip.emplace_back(hi, lo, a * bp);
    }
    Eigen::SparseMatrix<double> A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

Stepper::Stepper(const Scenario& scenario) : scenario_(scenario) {
    if (!scenario.equilibrium) throw ArgumentError("scenario has not been finalized");
}

Stepper::Solver& Stepper::solver(const Eigen::SparseMatrix<double>& op, double dt) {
    auto key = std::make_pair(static_cast<const void*>(&op), dt);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
    const auto N = op.rows();
    Eigen::SparseMatrix<double> I(N, N);
    I.setIdentity();
    Eigen::SparseMatrix<double> S = I - dt * op;
    S.makeCompressed();
    auto lu = std::make_unique<Solver>();
    lu->compute(S);
    if (lu->info() != Eigen::Success) throw NumericalError("transport matrix factorization failed");
    auto& ref = *lu;
    cache_.emplace(key, std::move(lu));
    return ref;
}

Field Stepper::solve(const Eigen::SparseMatrix<double>& op, double dt, const Field& rhs) {
    Solver& lu = solver(op, dt);
    Field x = lu.solve(rhs);
    // One refinement pass keeps the rounding drift of the conserved sums unbiased.
    const Field residual = rhs - (x - dt * (op * x));
    x += lu.solve(residual);
    if (!x.allFinite()) throw StepRejected("non-finite transport solve");
    return x;
}

void Stepper::check_positive(const StateField& s) {
    for (const auto& u : s.u) {
        for (Eigen::Index k = 0; k < u.size(); ++k) {
            if (!(u[k] >= 0.0) || !std::isfinite(u[k])) throw StepRejected("density left the positive cone");
        }
    }
    for (Eigen::Index k = 0; k < s.e.size(); ++k) {
        if (!(s.e[k] > 0.0) || !std::isfinite(s.e[k])) throw StepRejected("energy left the positive cone");
    }
}

namespace {

void check_input(const StateField& s, const Scenario& sc, std::size_t species) {
    if (s.grid != sc.grid) throw ArgumentError("state lives on a different grid than the scenario");
    if (s.species() != species) throw ArgumentError("state has the wrong number of species");
    const auto N = static_cast<Eigen::Index>(sc.grid->size());
    if (s.e.size() != N) throw ArgumentError("energy field size does not match grid");
    for (const auto& u : s.u) {
        if (u.size() != N) throw ArgumentError("density field size does not match grid");
    }
}

}  // namespace

TorusStepper::TorusStepper(const Scenario& scenario)
    : Stepper(scenario), L_(laplacian_operator(*scenario.grid, scenario.kappa)) {}

StateField TorusStepper::step(const StateField& state, double dt) {
    check_input(state, scenario_, 2);
    const Field& n = state.u[0];
    const Field& p = state.u[1];
    Field r(n.size());
    for (Eigen::Index k = 0; k < n.size(); ++k) r[k] = scenario_.rate.coefficient(n[k], p[k]) * (state.e[k] - n[k] * p[k]);
    StateField out{state.grid, {solve(L_, dt, n + dt * r), solve(L_, dt, p + dt * r)}, solve(L_, dt, state.e)};
    check_positive(out);
    return out;
}

ConfinedStepper::ConfinedStepper(const Scenario& scenario)
    : Stepper(scenario), A_(fitted_drift_operator(*scenario.grid, *scenario.equilibrium, scenario.kappa)) {
    const auto N = static_cast<Eigen::Index>(scenario.grid->size());
    rho_.resize(N);
    for (Eigen::Index k = 0; k < N; ++k) rho_[k] = 1.0 / scenario.equilibrium->e_at(static_cast<std::size_t>(k));
}

StateField ConfinedStepper::step(const StateField& state, double dt) {
    check_input(state, scenario_, 2);
    const Field& n = state.u[0];
    const Field& p = state.u[1];
    Field r(n.size());
    for (Eigen::Index k = 0; k < n.size(); ++k) {
        r[k] = scenario_.rate.coefficient(n[k], p[k]) * (state.e[k] - rho_[k] * n[k] * p[k]);
    }
    StateField out{state.grid, {solve(A_, dt, n + dt * r), solve(A_, dt, p + dt * r)}, solve(A_, dt, state.e)};
    check_positive(out);
    return out;
}

GeneralStepper::GeneralStepper(const Scenario& scenario)
    : Stepper(scenario),
      L_(laplacian_operator(*scenario.grid, scenario.kappa)),
      data_(sample_model(scenario.model, *scenario.grid)) {}

StateField GeneralStepper::step(const StateField& state, double dt) {
    const EntropyModel& model = scenario_.model;
    const std::size_t I = model.species();
    check_input(state, scenario_, I);
    const Grid& g = *state.grid;
    const auto N = static_cast<Eigen::Index>(g.size());
    const auto In = static_cast<Eigen::Index>(I);
    std::vector<Field> rhs_u = state.u;
    Field rhs_e = state.e;

    auto cell_u = [&](std::size_t k) {
        Eigen::VectorXd u(In);
        for (Eigen::Index i = 0; i < In; ++i) u[i] = state.u[static_cast<std::size_t>(i)][static_cast<Eigen::Index>(k)];
        return u;
    };

    if (data_.x_dependent) {
        const double c = dt * scenario_.kappa / (g.h() * g.h());
        for (const Face& f : g.faces()) {
            const auto lo = static_cast<Eigen::Index>(f.lo);
            const auto hi = static_cast<Eigen::Index>(f.hi);
            const double ea = state.e[lo];
            const double eb = state.e[hi];
            const Eigen::VectorXd xi = face_spatial_jump(model, data_, f.lo, f.hi, ea, eb);
            if (xi.cwiseAbs().maxCoeff() == 0.0) continue;
            const Eigen::VectorXd ua = cell_u(f.lo);
            const Eigen::VectorXd ub = cell_u(f.hi);
            if (ua.minCoeff() <= 0.0 || ub.minCoeff() <= 0.0) {
                throw StepRejected("drift flux needs positive densities on both sides of a face");
            }
            const FaceSecant B = face_secant(model, ua, ub, ea, eb, 0.5 * (data_.heat_factor[lo] + data_.heat_factor[hi]));
            if (!(B.schur > 1e-12 * B.schur_scale)) {
                throw NumericalError("mobility degenerates on a face (M below 1e-12 of its scale); reduce dt or refine");
            }
            const Eigen::VectorXd y = secant_solve(B, xi);
            for (Eigen::Index i = 0; i < In; ++i) {
                rhs_u[static_cast<std::size_t>(i)][lo] -= c * y[i];
                rhs_u[static_cast<std::size_t>(i)][hi] += c * y[i];
            }
            rhs_e[lo] -= c * y[In];
            rhs_e[hi] += c * y[In];
        }
    }

    for (Eigen::Index k = 0; k < N; ++k) {
        const auto cell = static_cast<std::size_t>(k);
        const Eigen::VectorXd u = cell_u(cell);
        const double e = state.e[k];
        Eigen::VectorXd w(In);
        for (Eigen::Index i = 0; i < In; ++i) {
            const auto si = static_cast<std::size_t>(i);
            w[i] = std::exp(data_.log_coef[si][k] + model.b[si] * std::log(e));
        }
        const Eigen::VectorXd R = reaction_rhs(scenario_.network, u, w, scenario_.network.k_star(u, e));
        for (Eigen::Index i = 0; i < In; ++i) rhs_u[static_cast<std::size_t>(i)][k] += dt * R[i];
    }

    StateField out;
    out.grid = state.grid;
    for (std::size_t i = 0; i < I; ++i) out.u.push_back(solve(L_, dt, rhs_u[i]));
    out.e = solve(L_, dt, rhs_e);
    check_positive(out);
    return out;
}

std::unique_ptr<Stepper> make_stepper(const Scenario& scenario) {
    switch (scenario.kind) {
        case ScenarioKind::torus: return std::make_unique<TorusStepper>(scenario);
        case ScenarioKind::confined: return std::make_unique<ConfinedStepper>(scenario);
        case ScenarioKind::general: return std::make_unique<GeneralStepper>(scenario);
    }
    throw ArgumentError("unknown scenario kind");
}

StateField step_torus(const StateField& state, const Scenario& scenario, double dt) {
    return TorusStepper(scenario).step(state, dt);
}

StateField step_confined(const StateField& state, const Scenario& scenario, double dt) {
    return ConfinedStepper(scenario).step(state, dt);
}

StateField step_general(const StateField& state, const Scenario& scenario, double dt) {
    return GeneralStepper(scenario).step(state, dt);
}

namespace {

std::string describe_extrema(const StateField& s, double t) {
    std::ostringstream os;
    os.precision(6);
    os << "at t=" << t << ":";
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        os << " u" << i << " in [" << s.u[i].minCoeff() << ", " << s.u[i].maxCoeff() << "]";
    }
    os << " e in [" << s.e.minCoeff() << ", " << s.e.maxCoeff() << "]";
    return os.str();
}

}  // namespace

RunResult run(const Scenario& scenario, const RunOptions& options) {
    if (!scenario.equilibrium) throw ArgumentError("scenario has not been finalized");
    auto stepper = make_stepper(scenario);
    DiagnosticsEngine diag(scenario, options.diagnostics);
    RunResult res;
    StateField state = scenario.initial;

    double dt = scenario.dt > 0.0 ? scenario.dt : default_time_step(scenario, state);
    std::size_t nsteps = 0;
    if (scenario.t_end > 0.0) {
        nsteps = static_cast<std::size_t>(std::ceil(scenario.t_end / dt - 1e-9));
        dt = scenario.t_end / static_cast<double>(nsteps);
    }

    std::vector<double> snap_times = scenario.snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());
    std::size_t next_snap = 0;
    auto take_snapshots = [&](double t) {
        while (next_snap < snap_times.size() && snap_times[next_snap] <= t + 1e-12 * std::max(1.0, t)) {
            res.snapshots.push_back({t, state});
            ++next_snap;
        }
    };

    std::vector<Record> records;
    records.push_back(diag.record(0.0, state, nullptr));
    StateField last_recorded = state;
    take_snapshots(0.0);

    std::function<StateField(const StateField&, double, int, double)> advance =
        [&](const StateField& s, double h, int depth, double t0) -> StateField {
        try {
            return stepper->step(s, h);
        } catch (const StepRejected& ex) {
            ++res.rejected;
            if (depth >= options.max_halvings) {
                throw RunFailure(std::string("step rejected after ") + std::to_string(depth) + " halvings (" +
                                     ex.what() + ") " + describe_extrema(s, t0),
                                 t0);
            }
            const StateField half = advance(s, 0.5 * h, depth + 1, t0);
            return advance(half, 0.5 * h, depth + 1, t0 + 0.5 * h);
        }
    };

    for (std::size_t k = 1; k <= nsteps; ++k) {
        const double t0 = static_cast<double>(k - 1) * dt;
        try {
            state = advance(state, dt, 0, t0);
        } catch (const RunFailure&) {
            throw;
        } catch (const NumericalError& ex) {
            throw RunFailure(std::string(ex.what()) + " " + describe_extrema(state, t0), t0);
        }
        const double t = static_cast<double>(k) * dt;
        ++res.steps;
        if (k % static_cast<std::size_t>(scenario.cadence) == 0) {
            records.push_back(diag.record(t, state, &last_recorded));
            last_recorded = state;
        }
        take_snapshots(t);
    }
    res.t_final = static_cast<double>(nsteps) * dt;
    res.final_state = state;
    res.report = diag.finish(std::move(records), scenario.initial, state);
    return res;
}

}  // namespace erds
