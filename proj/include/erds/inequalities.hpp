#pragma once

#include "erds/grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace erds {

struct InequalityCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = true;
};

// log(y)(y - 1) >= 4 (sqrt(y) - 1)^2
InequalityCheck check_el_in(double y);
// lambda_B(y) <= 2 (1 + |log y|)(sqrt(y) - 1)^2
InequalityCheck check_el_in2(double y);
// 3 |u - 1|^2 <= (2u + 4) lambda_B(u)
InequalityCheck check_pinsker_pointwise(double u);

struct DensityPair {
    Field f;
    Field g;
    double cell_volume = 1.0;

    void validate() const;
};

struct CkpResult {
    double lhs = 0.0;  // 3 / (2|f|_1 + 4|g|_1) |f - g|_1^2
    double rhs = 0.0;  // int g lambda_B(f/g)
    bool holds = true;
    bool vacuous = false;
};

CkpResult ckp_lower_bound(const DensityPair& pair);

struct SobolevCheck {
    double l4_squared = 0.0;
    double l2_squared = 0.0;
    double gradient = 0.0;
    double required_C = 0.0;  // smallest C for which this f satisfies the inequality
    bool holds = true;
};

// |f|^2_{L4(nu)} <= C |grad f|^2_{L2(nu)} + |f|^2_{L2(nu)}; null weight is the uniform measure.
SobolevCheck check_sobolev_embedding(const Grid& grid, const Field& f, const Field* weight, double C);
// int f log(f / |f|_{L1(nu)}) dnu <= C int |grad sqrt f|^2 dnu
InequalityCheck check_log_sobolev(const Grid& grid, const Field& f, const Field* weight, double C);

struct Aux1Result {
    double lhs = 0.0;
    double rhs = 0.0;
    double C0 = 0.0;
    bool holds = true;
    int bracket_case = 0;  // 0: both ratios >= 1/4, 1: only pbar/p* >= 1/4, 2: only nbar/n* >= 1/4, 3: neither
    int transfer_branch = 0;  // 0: pbar/p* attains the max, 1: nbar/n* does
};

// n* lambda_B(nbar/n*) + p* lambda_B(pbar/p*) <= C0 (sqrt(nbar pbar / (n* p*)) - 1)^2 under
// nbar - n* = pbar - p*.
Aux1Result aux1_bound(double n_bar, double p_bar, double n_star, double p_star);

struct Aux2Result {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = true;
    double Rn_delta = 0.0;   // R_n int delta_n^2, bounded by sqrt(nbar)
    double Rn2_delta = 0.0;  // R_n^2 int delta_n^2, bounded by 1
    double Rp_delta = 0.0;
    double Rp2_delta = 0.0;
    bool intermediate_holds = true;
    std::vector<std::string> precondition_failures;
};

// (R_n nbar' sqrt(pbar) + R_p pbar' sqrt(nbar) - R_n R_p nbar' pbar')^2 <= 2 C_P (nbar + pbar)(P_n + P_p)
// with nbar' = int delta_n^2, R_n = 1 / (sqrt(nbar) + int sqrt n).
Aux2Result aux2_bound(const Grid& grid, const Field& delta_n, const Field& delta_p, double n_bar, double p_bar,
                      double P_n, double P_p, double C_P);

struct SuiteEntry {
    std::string name;
    std::size_t samples = 0;
    std::size_t violations = 0;
    double worst_margin = 0.0;  // min over samples of (slack side - tight side) / scale; negative is a violation
    std::vector<std::size_t> branch_hits;
};

struct SuiteReport {
    std::uint64_t seed = 0;
    std::vector<SuiteEntry> entries;
    bool all_hold() const;
};

// Randomized oracle suite: log-uniform ratios, random density pairs, compatible quadruples across all
// bracket cases, and random smooth fields for the square-root lemma.
SuiteReport run_inequality_suite(std::size_t samples, std::uint64_t seed);

}  // namespace erds
