#pragma once

#include "erds/diagnostics.hpp"
#include "erds/scenario.hpp"
#include "erds/secant_mobility.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <map>
#include <memory>
#include <utility>
#include <vector>

namespace erds {

// Backward-Euler transport with explicit reaction. Factorizations of (I - dt A) are cached per dt.
class Stepper {
public:
    explicit Stepper(const Scenario& scenario);
    virtual ~Stepper() = default;
    Stepper(const Stepper&) = delete;
    Stepper& operator=(const Stepper&) = delete;

    // Throws StepRejected when the result leaves the positive cone.
    virtual StateField step(const StateField& state, double dt) = 0;

protected:
    using Solver = Eigen::SparseLU<Eigen::SparseMatrix<double>>;
    Solver& solver(const Eigen::SparseMatrix<double>& op, double dt);
    Field solve(const Eigen::SparseMatrix<double>& op, double dt, const Field& rhs);
    static void check_positive(const StateField& s);

    const Scenario& scenario_;

private:
    std::map<std::pair<const void*, double>, std::unique_ptr<Solver>> cache_;
};

// Periodic Laplacian kappa * Delta as a conservative face stencil.
Eigen::SparseMatrix<double> laplacian_operator(const Grid& grid, double kappa);
// kappa div(grad q + q grad phi) with two-point exponentially fitted fluxes, phi = -log(e*).
Eigen::SparseMatrix<double> fitted_drift_operator(const Grid& grid, const EquilibriumState& eq, double kappa);
// x / (exp(x) - 1)
double bernoulli_fn(double x);

class TorusStepper : public Stepper {
public:
    explicit TorusStepper(const Scenario& scenario);
    StateField step(const StateField& state, double dt) override;

private:
    Eigen::SparseMatrix<double> L_;
};

class ConfinedStepper : public Stepper {
public:
    explicit ConfinedStepper(const Scenario& scenario);
    StateField step(const StateField& state, double dt) override;

private:
    Eigen::SparseMatrix<double> A_;
    Field rho_;  // 1 / e*
};

// Implicit Laplacian plus the explicit part of the Onsager flux kappa B^{-1} jump(DS) / h on each face,
// with B the exact secant of -D^2 S. The flux vanishes identically at equilibrium and the explicit part
// vanishes when the model has no spatial dependence.
class GeneralStepper : public Stepper {
public:
    explicit GeneralStepper(const Scenario& scenario);
    StateField step(const StateField& state, double dt) override;

private:
    Eigen::SparseMatrix<double> L_;
    CellModelData data_;
};

std::unique_ptr<Stepper> make_stepper(const Scenario& scenario);

StateField step_torus(const StateField& state, const Scenario& scenario, double dt);
StateField step_confined(const StateField& state, const Scenario& scenario, double dt);
StateField step_general(const StateField& state, const Scenario& scenario, double dt);

// A step failure with the time it happened and the field extrema of the last accepted state.
struct RunFailure : NumericalError {
    RunFailure(const std::string& what, double time) : NumericalError(what), t(time) {}
    double t;
};

struct Snapshot {
    double t = 0.0;
    StateField state;
};

struct RunResult {
    StateField final_state;
    double t_final = 0.0;
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::vector<Snapshot> snapshots;
    DiagnosticsReport report;
};

struct RunOptions {
    DiagnosticsOptions diagnostics;
    int max_halvings = 20;
};

// Advances the finalized scenario to t_end, recording every `cadence` steps.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

}  // namespace erds
