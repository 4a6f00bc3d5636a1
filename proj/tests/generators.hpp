#pragma once

// Small hand-rolled generators for the property tests.

#include "erds/grid.hpp"
#include "erds/reaction_network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace erds::testing {

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

    Eigen::VectorXd positive(Eigen::Index n, double a = 1e-2, double b = 1e2) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = log_uniform(a, b);
        return v;
    }

    // mean + a few random low modes, kept above mean * floor_ratio
    Field smooth_field(const Grid& g, double mean, double rel_amp, double floor_ratio = 0.05) {
        double c[3], ph[3];
        for (int j = 0; j < 3; ++j) {
            c[j] = uniform(-rel_amp, rel_amp) / 3.0;
            ph[j] = uniform(0.0, 2.0 * M_PI);
        }
        const double period = g.domain() == Domain::torus ? 1.0 : 2.0 * g.half_width();
        Field f = g.sample_with([&](const Point& x) {
            double v = 1.0;
            for (int d = 0; d < g.dim(); ++d) {
                for (int j = 0; j < 3; ++j) v += c[j] * std::cos(2.0 * M_PI * (j + 1) * x[d] / period + ph[j] + d);
            }
            return mean * std::max(v, floor_ratio);
        });
        return f;
    }

    // Random mass-action network with at least one non-trivial reaction.
    ReactionNetwork network(int species, int reactions) {
        std::vector<Reaction> rs;
        while (static_cast<int>(rs.size()) < reactions) {
            Reaction r;
            r.alpha.resize(static_cast<std::size_t>(species));
            r.beta.resize(static_cast<std::size_t>(species));
            bool differs = false;
            for (int i = 0; i < species; ++i) {
                r.alpha[static_cast<std::size_t>(i)] = integer(0, 2);
                r.beta[static_cast<std::size_t>(i)] = integer(0, 2);
                differs |= r.alpha[static_cast<std::size_t>(i)] != r.beta[static_cast<std::size_t>(i)];
            }
            if (!differs) continue;
            const double k = log_uniform(1e-2, 1e2);
            r.rate_fn = [k](const Eigen::VectorXd&, double) { return k; };
            rs.push_back(r);
        }
        return ReactionNetwork(static_cast<std::size_t>(species), rs);
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

}  // namespace erds::testing
