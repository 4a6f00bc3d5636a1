#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <vector>

namespace erds {

// Logarithmic mean (a - b) / (log a - log b), with Λ(a, a) = a.
double lambda_mean(double a, double b);

using RateFn = std::function<double(const Eigen::VectorXd& u, double e)>;

struct Reaction {
    std::vector<int> alpha;
    std::vector<int> beta;
    RateFn rate_fn;  // returns k*_r(u, e)
};

// Named rate laws. The reaction coefficient is k(u) * e^q; with q = 1 and the
// bipolar reaction this gives the generation-recombination term k (e - n p).
struct RateLaw {
    enum class Kind { constant, read_shockley_hall };

    Kind kind = Kind::constant;
    double k = 1.0;   // constant law
    double k0 = 1.0;  // Read-Shockley-Hall: k0 / (1 + c_n u_0 + c_p u_1)
    double c_n = 0.0;
    double c_p = 0.0;
    double energy_exponent = 1.0;

    double coefficient(double n, double p) const;
    // Bounds of k(n, p) over 0 <= n <= n_max, 0 <= p <= p_max.
    double lower_bound(double n_max, double p_max) const;
    double upper_bound() const;
    RateFn rate_fn() const;
    void validate() const;
};

class ReactionNetwork {
public:
    ReactionNetwork() = default;
    ReactionNetwork(std::size_t species, std::vector<Reaction> reactions);

    std::size_t species_count() const { return species_; }
    const std::vector<Reaction>& reactions() const { return reactions_; }
    // Orthonormal basis of S = span{alpha - beta}, one column per direction.
    const Eigen::MatrixXd& stoich_basis() const { return basis_; }
    // Orthogonal projection onto the complement of S.
    const Eigen::MatrixXd& projection() const { return projection_; }
    // Orthonormal basis of the complement, one column per conserved direction.
    Eigen::MatrixXd conserved_basis() const;

    Eigen::VectorXd k_star(const Eigen::VectorXd& u, double e) const;

private:
    std::size_t species_ = 0;
    std::vector<Reaction> reactions_;
    Eigen::MatrixXd basis_;
    Eigen::MatrixXd projection_;
};

// The n + p <-> 0 reaction of the bipolar model.
ReactionNetwork bipolar_network(const RateLaw& law);

Eigen::MatrixXd stoich_projection(const std::vector<Reaction>& reactions);

// R(u) = -sum_r k*_r (u^a/w^a - u^b/w^b)(a - b)
Eigen::VectorXd reaction_rhs(const ReactionNetwork& net, const Eigen::VectorXd& u,
                             const Eigen::VectorXd& w, const Eigen::VectorXd& k_star);

Eigen::MatrixXd onsager_matrix(const ReactionNetwork& net, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& w, const Eigen::VectorXd& k_star);

// Reaction part of the entropy production, sum_r k*_r (y_a - y_b)(log y_a - log y_b).
double reaction_dissipation(const ReactionNetwork& net, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& w, const Eigen::VectorXd& k_star);

struct DetailedBalanceReport {
    bool balanced = true;
    // log(k_fw w^alpha) - log(k_bw w^beta) per reaction
    std::vector<double> log_residuals;
};

DetailedBalanceReport check_detailed_balance(const ReactionNetwork& net, const Eigen::VectorXd& w,
                                             const std::vector<double>& forward_rates,
                                             const std::vector<double>& backward_rates);

}  // namespace erds
