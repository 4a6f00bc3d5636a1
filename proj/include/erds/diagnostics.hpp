#pragma once

#include "erds/equilibrium.hpp"
#include "erds/grid.hpp"
#include "erds/scenario.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <string>
#include <vector>

namespace erds {

struct ProductionComponents {
    double P_n = 0.0;
    double P_p = 0.0;
    double P_e = 0.0;
    double P_R = 0.0;
    double P_total = 0.0;  // kappa (P_n + P_p + P_e) + P_R
};

// 2|grad sqrt n|^2 + 2|grad sqrt(n e*/e)|^2 (e/e*), 4c|grad e^{1/4}|^2 and the reaction term,
// with differences taken across cell faces.
ProductionComponents entropy_production_torus(const StateField& state, const Scenario& scenario,
                                              const EquilibriumState& eq);

// 2 e*|grad sqrt(n/e*)|^2 + 2 e|grad sqrt(n/e)|^2, 4c e*|grad (e/e*)^{1/4}|^2 and
// k e (y - 1) log y with y = n p / (e e*).
ProductionComponents entropy_production_confined(const StateField& state, const Scenario& scenario,
                                                 const EquilibriumState& eq);

// Onsager form of the general system: per face xi . A xi with xi the jump of DS and A the exact
// secant mobility; the split is density part of species 0, remaining species, energy part, reaction.
ProductionComponents entropy_production_general(const StateField& state, const Scenario& scenario,
                                                const EquilibriumState& eq);

ProductionComponents entropy_production(const StateField& state, const Scenario& scenario,
                                        const EquilibriumState& eq);

double relative_entropy(const StateField& state, const Scenario& scenario, const EquilibriumState& eq);

// Pointwise data of the confined system for the two equivalent integrand forms.
struct ConfinedPoint {
    double n = 1.0, p = 1.0, e = 1.0, es = 1.0;
    Point grad_n{}, grad_p{}, grad_e{}, grad_es{};
};

struct ConfinedParameters {
    double c = 1.0;
    double C_n = 1.0;
    double C_p = 1.0;
    double k = 1.0;
    double kappa = 1.0;
};

// kappa [n|grad log(n/w_n)|^2 + p|grad log(p/w_p)|^2 + N/4 |grad log(e/e*)|^2] + reaction,
// w_i = C_i sqrt(e e*), N = n + p + c sqrt(e e*)
double confined_integrand_first_form(const ConfinedPoint& q, const ConfinedParameters& par);
// kappa [n/2 |grad log(n/e*)|^2 + n/2 |grad log(n/e)|^2 + (p terms) + c e* sqrt(e/e*)|grad log sqrt(e/e*)|^2]
// + reaction
double confined_integrand_second_form(const ConfinedPoint& q, const ConfinedParameters& par);

// (y - 1) log y, using the limit near y = 1.
double reaction_log_term(double y);

struct Record {
    double t = 0.0;
    double H = 0.0;
    ProductionComponents P;
    ProductionComponents P_mid;  // at the average of this record and the previous one
    double mass_n = 0.0;
    double mass_p = 0.0;
    double mass_diff = 0.0;
    double energy = 0.0;
    double e_min = 0.0, e_max = 0.0;
    double e_ratio_min = 0.0, e_ratio_max = 0.0;  // e / e*
    double n_min = 0.0, p_min = 0.0;
    double K = 0.0;  // EEP constant at this state, 0 when not evaluated
};

struct ResidualReport {
    std::vector<double> absolute;
    std::vector<double> relative;  // NaN where P is below the floor
    double max_absolute = 0.0;
    double max_relative = 0.0;
    std::size_t skipped = 0;
};

// r_k = (H_{k+1} - H_k)/dt + P_{k+1/2}. Relative values are reported where
// P_{k+1/2} exceeds floor * max P.
ResidualReport dissipation_residual(const std::vector<Record>& series, double floor = 1e-8);

struct FunctionalConstants {
    double C_P = 0.0;
    double C_LS = 0.0;
    double C_S = 0.0;
    bool trial_based = true;
};

struct ConstantOptions {
    int random_trials = 48;
    int search_rounds = 6;
    std::uint64_t seed = 1;
};

// Probability measure nu on the grid with its Dirichlet form
// sum_faces w_f (jump f / h)^2 h^d, w_f the mean of the adjacent cell weights.
struct WeightedMeasure {
    Field nu;      // cell masses, summing to 1
    Field face_w;  // face weights
    Eigen::SparseMatrix<double> L;
};

// Null weight means the normalized uniform measure; otherwise the weight must have unit mass.
WeightedMeasure weighted_measure(const Grid& grid, const Field* weight);
double dirichlet_form(const Grid& grid, const WeightedMeasure& m, const Field& f);

// Variance over Dirichlet form, maximized by shifted inverse iteration on the weighted Laplacian.
double poincare_constant(const Grid& grid, const Field* weight);
double log_sobolev_quotient(const Grid& grid, const Field& weight, const Field& f);
double sobolev_quotient(const Grid& grid, const Field& weight, const Field& f);
FunctionalConstants estimate_functional_constants(const Grid& grid, const Field* weight,
                                                  const ConstantOptions& options = {});
// Cheaper lower bound for the per-record weight e/e*.
double log_sobolev_estimate(const Grid& grid, const Field& weight, std::uint64_t seed);

// Constant chain of the averages lemma. The bracket has three cases on r_n = nbar/n*, r_p = pbar/p*;
// when both ratios are below 1/4 it is 2.
double c1_bracket(double n_bar, double p_bar, double n_star, double p_star);
double c2_transfer(double n_bar, double p_bar, double n_star, double p_star);
double c0_product(double n_bar, double p_bar, double n_star, double p_star);

struct EepInputs {
    double n_bar = 1.0, p_bar = 1.0;
    double n_star = 1.0, p_star = 1.0, e_star = 1.0;
    double kappa = 1.0;
    double k0 = 1.0;  // lower bound of the reaction coefficient
    double c = 1.0;
    double C_P = 0.0, C_S = 0.0, C_LS = 0.0;
    double C_LS_weighted = 0.0;  // for the measure e dx / e*; 0 falls back to C_LS
};

struct EepConstant {
    double c1_bracket = 0.0;
    double c2_transfer = 0.0;
    double c0_product = 0.0;
    double c_one_chain = 0.0;
    double K = 0.0;
    // C_1 + max(C_LS, C_LS(e/e*), C_S) / (4 kappa): the sum the inequality chain actually produces
    double K_chain_sum = 0.0;
};

EepConstant eep_constant(const EepInputs& in);

struct DecayFit {
    double k_fit = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

// Least squares of log H against t after dropping the first `transient` fraction of records.
DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& H, double transient = 0.1);

// max_k H_k / (H_0 exp(-t_k / K_hat))
double decay_bound_ratio(const std::vector<double>& t, const std::vector<double>& H, double K_hat);

struct L1Bound {
    double l1_n = 0.0;
    double l1_p = 0.0;
    double l2_sqrt_e = 0.0;
    double lhs = 0.0;  // l1_n^2 + l1_p^2 + l2_sqrt_e^2
    double C = 0.0;
    double H = 0.0;
    bool holds = true;
};

L1Bound l1_convergence_bound(const StateField& state, const EquilibriumState& eq, const EntropyModel& model);

struct DiagnosticsReport {
    std::vector<Record> series;
    double K_formula = 0.0;
    double K_hat = 0.0;
    double k_fit = 0.0;
    double r_squared = 0.0;
    double max_dissipation_residual = 0.0;
    double eep_worst_ratio = 0.0;  // max H / (K_hat P)
    double decay_bound_ratio = 0.0;
    double ckp_prefactor = 0.0;
    L1Bound final_L1;
    FunctionalConstants constants;
    std::vector<std::string> flags;
};

struct DiagnosticsOptions {
    bool eep = true;
    bool per_record_log_sobolev = true;
    bool constants_given = false;
    FunctionalConstants given;
    ConstantOptions constant_options;
};

// Per-run analysis that needs the scenario: functional constants, EEP constants per record.
class DiagnosticsEngine {
public:
    DiagnosticsEngine(const Scenario& scenario, const DiagnosticsOptions& options);

    Record record(double t, const StateField& state, const StateField* previous) const;
    DiagnosticsReport finish(std::vector<Record> series, const StateField& initial, const StateField& final_state) const;

    const FunctionalConstants& constants() const { return constants_; }

private:
    EepInputs eep_inputs(const StateField& state) const;

    const Scenario& scenario_;
    DiagnosticsOptions options_;
    FunctionalConstants constants_;
    bool eep_active_ = false;
};

}  // namespace erds
