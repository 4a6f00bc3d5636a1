#pragma once

#include "erds/entropy.hpp"
#include "erds/equilibrium.hpp"
#include "erds/grid.hpp"

namespace erds {

// H = int w_n lambda_B(n/w_n) + w_p lambda_B(p/w_p) + (c + C_n + C_p)/(2 sqrt(e*)) (sqrt(e) - sqrt(e*))^2
// with w_i = C_i sqrt(e).
double relative_entropy_torus(const StateField& state, const EquilibriumState& eq, const EntropyModel& model);

// Same quantity from its definition, -S + S* + Sigma_e int (e - e*).
double relative_entropy_torus_defining(const StateField& state, const EquilibriumState& eq,
                                       const EntropyModel& model);

// The torus entropy split into averages: 1/2 int n ln(n/nbar) + 1/2 int n ln(n e*/(nbar e))
// + n* lambda_B(nbar/n*) + (p terms) + c/(2 sqrt(e*)) int (sqrt(e) - sqrt(e*))^2.
// Equal to relative_entropy_torus whenever int e = E0.
double relative_entropy_average_split(const StateField& state, const EquilibriumState& eq,
                                      const EntropyModel& model);

// H = int w_n lambda_B(n/w_n) + w_p lambda_B(p/w_p) + (c + C_n + C_p)/2 (sqrt(e) - sqrt(e*))^2
// with w_i = C_i exp(-V) sqrt(e) = C_i sqrt(e e*).
double relative_entropy_confined(const StateField& state, const EquilibriumState& eq, const EntropyModel& model);

struct GeneralRelativeEntropy {
    double density = 0.0;  // sum_i int ct_i w_i lambda_B(u_i / (ct_i w_i))
    double weights = 0.0;  // -sum_i int ct_i (w_i(e) - w_i(e*) - w_i'(e*)(e - e*))
    double heat = 0.0;     // -int (s(e) - s(e*) - s'(e*)(e - e*))
    double total() const { return density + weights + heat; }
};

GeneralRelativeEntropy relative_entropy_general(const StateField& state, const EquilibriumState& eq,
                                                const EntropyModel& model);

// b r - r^b + (1 - b): the Bregman gap of r^b at r = 1, computed without cancellation.
double power_bregman(double b, double r);

}  // namespace erds
