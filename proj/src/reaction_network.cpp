#include "erds/reaction_network.hpp"

#include "erds/errors.hpp"

#include <cmath>
#include <string>

namespace erds {

double lambda_mean(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw DomainError("lambda_mean requires finite positive arguments");
    }
    const double la = std::log(a);
    const double lb = std::log(b);
    if (std::abs(la - lb) < 1e-8) {
        const double m = 0.5 * (a + b);
        return m - (a - b) * (a - b) / (12.0 * m);
    }
    return (a - b) / (la - lb);
}

double RateLaw::coefficient(double n, double p) const {
    if (kind == Kind::constant) return k;
    return k0 / (1.0 + c_n * n + c_p * p);
}

double RateLaw::lower_bound(double n_max, double p_max) const {
    if (kind == Kind::constant) return k;
    return k0 / (1.0 + c_n * n_max + c_p * p_max);
}

double RateLaw::upper_bound() const { return kind == Kind::constant ? k : k0; }

RateFn RateLaw::rate_fn() const {
    const RateLaw law = *this;
    return [law](const Eigen::VectorXd& u, double e) {
        const double n = u.size() > 0 ? u[0] : 0.0;
        const double p = u.size() > 1 ? u[1] : 0.0;
        const double scale = law.energy_exponent == 1.0 ? e : std::pow(e, law.energy_exponent);
        return law.coefficient(n, p) * scale;
    };
}

void RateLaw::validate() const {
    if (kind == Kind::constant && !(k > 0.0)) throw ConfigError("rate constant k must be positive");
    if (kind == Kind::read_shockley_hall) {
        if (!(k0 > 0.0)) throw ConfigError("Read-Shockley-Hall k0 must be positive");
        if (c_n < 0.0 || c_p < 0.0) throw ConfigError("Read-Shockley-Hall c_n, c_p must be non-negative");
    }
    if (!std::isfinite(energy_exponent)) throw ConfigError("energy exponent must be finite");
}

namespace {

Eigen::VectorXd direction(const Reaction& r) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(r.alpha.size()));
    for (std::size_t i = 0; i < r.alpha.size(); ++i) v[static_cast<Eigen::Index>(i)] = r.alpha[i] - r.beta[i];
    return v;
}

// Modified Gram-Schmidt with one reorthogonalization pass.
Eigen::MatrixXd orthonormal_span(const std::vector<Eigen::VectorXd>& vectors, Eigen::Index dim) {
    std::vector<Eigen::VectorXd> q;
    for (const auto& v0 : vectors) {
        Eigen::VectorXd v = v0;
        const double norm0 = v.norm();
        if (norm0 == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& qk : q) v -= qk.dot(v) * qk;
        }
        const double norm = v.norm();
        if (norm > 1e-10 * norm0) q.push_back(v / norm);
    }
    Eigen::MatrixXd basis(dim, static_cast<Eigen::Index>(q.size()));
    for (std::size_t k = 0; k < q.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = q[k];
    return basis;
}

void check_lengths(const ReactionNetwork& net, const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                   const Eigen::VectorXd& k_star) {
    const auto I = static_cast<Eigen::Index>(net.species_count());
    if (u.size() != I || w.size() != I) throw ArgumentError("density vector length does not match species count");
    if (k_star.size() != static_cast<Eigen::Index>(net.reactions().size())) {
        throw ArgumentError("rate vector length does not match reaction count");
    }
}

double log_monomial(const std::vector<int>& exps, const Eigen::VectorXd& log_ratio) {
    double s = 0.0;
    for (std::size_t i = 0; i < exps.size(); ++i) {
        if (exps[i] != 0) s += exps[i] * log_ratio[static_cast<Eigen::Index>(i)];
    }
    return s;
}

Eigen::VectorXd log_ratio(const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
    Eigen::VectorXd lr(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (!(u[i] > 0.0) || !(w[i] > 0.0)) throw DomainError("densities and reference weights must be positive");
        lr[i] = std::log(u[i]) - std::log(w[i]);
    }
    return lr;
}

}  // namespace

Eigen::MatrixXd stoich_projection(const std::vector<Reaction>& reactions) {
    if (reactions.empty()) throw ArgumentError("stoich_projection needs at least one reaction");
    const auto I = static_cast<Eigen::Index>(reactions.front().alpha.size());
    std::vector<Eigen::VectorXd> dirs;
    for (const auto& r : reactions) dirs.push_back(direction(r));
    const Eigen::MatrixXd q = orthonormal_span(dirs, I);
    return Eigen::MatrixXd::Identity(I, I) - q * q.transpose();
}

ReactionNetwork::ReactionNetwork(std::size_t species, std::vector<Reaction> reactions)
    : species_(species), reactions_(std::move(reactions)) {
    if (species == 0) throw ConfigError("a reaction network needs at least one species");
    const auto I = static_cast<Eigen::Index>(species);
    std::vector<Eigen::VectorXd> dirs;
    for (std::size_t r = 0; r < reactions_.size(); ++r) {
        const auto& rx = reactions_[r];
        if (rx.alpha.size() != species || rx.beta.size() != species) {
            throw ConfigError("reaction " + std::to_string(r) + " has stoichiometry of the wrong length");
        }
        bool trivial = true;
        for (std::size_t i = 0; i < species; ++i) {
            if (rx.alpha[i] < 0 || rx.beta[i] < 0) throw ConfigError("stoichiometric coefficients must be non-negative");
            if (rx.alpha[i] != rx.beta[i]) trivial = false;
        }
        if (trivial) throw ConfigError("reaction " + std::to_string(r) + " has alpha == beta");
        if (!rx.rate_fn) throw ConfigError("reaction " + std::to_string(r) + " has no rate function");
        dirs.push_back(direction(rx));
    }
    basis_ = orthonormal_span(dirs, I);
    projection_ = Eigen::MatrixXd::Identity(I, I) - basis_ * basis_.transpose();
}

Eigen::MatrixXd ReactionNetwork::conserved_basis() const {
    std::vector<Eigen::VectorXd> cols;
    for (Eigen::Index j = 0; j < projection_.cols(); ++j) cols.push_back(projection_.col(j));
    return orthonormal_span(cols, projection_.rows());
}

Eigen::VectorXd ReactionNetwork::k_star(const Eigen::VectorXd& u, double e) const {
    Eigen::VectorXd k(static_cast<Eigen::Index>(reactions_.size()));
    for (std::size_t r = 0; r < reactions_.size(); ++r) {
        const double v = reactions_[r].rate_fn(u, e);
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("rate function returned a non-positive value");
        k[static_cast<Eigen::Index>(r)] = v;
    }
    return k;
}

ReactionNetwork bipolar_network(const RateLaw& law) {
    law.validate();
    return ReactionNetwork(2, {Reaction{{1, 1}, {0, 0}, law.rate_fn()}});
}

Eigen::VectorXd reaction_rhs(const ReactionNetwork& net, const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                             const Eigen::VectorXd& k_star) {
    check_lengths(net, u, w, k_star);
    const Eigen::VectorXd lr = log_ratio(u, w);
    Eigen::VectorXd R = Eigen::VectorXd::Zero(u.size());
    for (std::size_t r = 0; r < net.reactions().size(); ++r) {
        const auto& rx = net.reactions()[r];
        const double ya = std::exp(log_monomial(rx.alpha, lr));
        const double yb = std::exp(log_monomial(rx.beta, lr));
        const double flux = k_star[static_cast<Eigen::Index>(r)] * (ya - yb);
        for (std::size_t i = 0; i < rx.alpha.size(); ++i) {
            R[static_cast<Eigen::Index>(i)] -= flux * (rx.alpha[i] - rx.beta[i]);
        }
    }
    return R;
}

Eigen::MatrixXd onsager_matrix(const ReactionNetwork& net, const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                               const Eigen::VectorXd& k_star) {
    check_lengths(net, u, w, k_star);
    const Eigen::VectorXd lr = log_ratio(u, w);
    const auto I = u.size();
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(I, I);
    for (std::size_t r = 0; r < net.reactions().size(); ++r) {
        const auto& rx = net.reactions()[r];
        const double ya = std::exp(log_monomial(rx.alpha, lr));
        const double yb = std::exp(log_monomial(rx.beta, lr));
        const Eigen::VectorXd v = direction(rx);
        H.noalias() += k_star[static_cast<Eigen::Index>(r)] * lambda_mean(ya, yb) * (v * v.transpose());
    }
    return H;
}

double reaction_dissipation(const ReactionNetwork& net, const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                            const Eigen::VectorXd& k_star) {
    check_lengths(net, u, w, k_star);
    const Eigen::VectorXd lr = log_ratio(u, w);
    double total = 0.0;
    for (std::size_t r = 0; r < net.reactions().size(); ++r) {
        const auto& rx = net.reactions()[r];
        const double la = log_monomial(rx.alpha, lr);
        const double lb = log_monomial(rx.beta, lr);
        total += k_star[static_cast<Eigen::Index>(r)] * (std::exp(la) - std::exp(lb)) * (la - lb);
    }
    return total;
}

DetailedBalanceReport check_detailed_balance(const ReactionNetwork& net, const Eigen::VectorXd& w,
                                             const std::vector<double>& forward_rates,
                                             const std::vector<double>& backward_rates) {
    DetailedBalanceReport rep;
    const std::size_t R = net.reactions().size();
    if (forward_rates.size() != R || backward_rates.size() != R) {
        throw ArgumentError("rate lists must have one entry per reaction");
    }
    Eigen::VectorXd lw(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) lw[i] = std::log(w[i]);
    for (std::size_t r = 0; r < R; ++r) {
        const auto& rx = net.reactions()[r];
        const double fw = std::log(forward_rates[r]) + log_monomial(rx.alpha, lw);
        const double bw = std::log(backward_rates[r]) + log_monomial(rx.beta, lw);
        const double res = fw - bw;
        rep.log_residuals.push_back(res);
        if (!(std::abs(res) <= 1e-10)) rep.balanced = false;
    }
    return rep;
}

}  // namespace erds
