#include "erds/diagnostics.hpp"

#include "erds/errors.hpp"
#include "erds/relative_entropy.hpp"
#include "erds/secant_mobility.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace erds {

namespace {

double sq(double x) { return x * x; }

// Face differences are divided by h and weighted by the cell volume.
double face_scale(const Grid& g) { return g.cell_volume() / (g.h() * g.h()); }

void require_bipolar(const StateField& s) {
    s.validate();
    if (s.species() != 2) throw ArgumentError("bipolar entropy production needs two species");
}

ProductionComponents bipolar_production(const StateField& s, const Scenario& sc, const EquilibriumState& eq,
                                        bool confined) {
    require_bipolar(s);
    const Grid& g = *s.grid;
    const Field& n = s.u[0];
    const Field& p = s.u[1];
    const Field& e = s.e;
    const double c = sc.model.c;
    ProductionComponents P;
    for (const Face& f : g.faces()) {
        const auto a = static_cast<Eigen::Index>(f.lo);
        const auto b = static_cast<Eigen::Index>(f.hi);
        const double esa = eq.e_at(f.lo);
        const double esb = eq.e_at(f.hi);
        const double esf = 0.5 * (esa + esb);
        const double ef = 0.5 * (e[a] + e[b]);
        P.P_n += 2.0 * esf * sq(std::sqrt(n[b] / esb) - std::sqrt(n[a] / esa)) +
                 2.0 * ef * sq(std::sqrt(n[b] / e[b]) - std::sqrt(n[a] / e[a]));
        P.P_p += 2.0 * esf * sq(std::sqrt(p[b] / esb) - std::sqrt(p[a] / esa)) +
                 2.0 * ef * sq(std::sqrt(p[b] / e[b]) - std::sqrt(p[a] / e[a]));
        if (confined) {
            P.P_e += 4.0 * c * esf * sq(std::sqrt(std::sqrt(e[b] / esb)) - std::sqrt(std::sqrt(e[a] / esa)));
        } else {
            P.P_e += 4.0 * c * sq(std::sqrt(std::sqrt(e[b])) - std::sqrt(std::sqrt(e[a])));
        }
    }
    const double fs = face_scale(g);
    P.P_n *= fs;
    P.P_p *= fs;
    P.P_e *= fs;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        const double y = confined ? n[i] * p[i] / (e[i] * eq.e_at(k)) : n[i] * p[i] / e[i];
        if (y == 0.0) throw DomainError("n p / e vanishes; the reaction production is infinite");
        P.P_R += sc.rate.coefficient(n[i], p[i]) * e[i] * reaction_log_term(y);
    }
    P.P_R *= g.cell_volume();
    P.P_total = sc.kappa * (P.P_n + P.P_p + P.P_e) + P.P_R;
    return P;
}

Point operator_sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1]}; }

double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1]; }

}  // namespace

double reaction_log_term(double y) {
    if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("reaction_log_term needs a positive finite ratio");
    const double d = y - 1.0;
    if (std::abs(d) < 0.5) return d * std::log1p(d);
    return d * std::log(y);
}

ProductionComponents entropy_production_torus(const StateField& state, const Scenario& scenario,
                                              const EquilibriumState& eq) {
    return bipolar_production(state, scenario, eq, false);
}

ProductionComponents entropy_production_confined(const StateField& state, const Scenario& scenario,
                                                 const EquilibriumState& eq) {
    return bipolar_production(state, scenario, eq, true);
}

ProductionComponents entropy_production_general(const StateField& state, const Scenario& scenario,
                                                const EquilibriumState& eq) {
    (void)eq;
    state.validate();
    const Grid& g = *state.grid;
    const EntropyModel& model = scenario.model;
    const auto I = static_cast<Eigen::Index>(model.species());
    if (static_cast<Eigen::Index>(state.species()) != I) throw ArgumentError("state and model species differ");
    const CellModelData data = sample_model(model, g);
    auto cell_u = [&](std::size_t k) {
        Eigen::VectorXd u(I);
        for (Eigen::Index i = 0; i < I; ++i) u[i] = state.u[static_cast<std::size_t>(i)][static_cast<Eigen::Index>(k)];
        return u;
    };
    ProductionComponents P;
    for (const Face& f : g.faces()) {
        const Eigen::VectorXd ua = cell_u(f.lo);
        const Eigen::VectorXd ub = cell_u(f.hi);
        const double ea = state.e[static_cast<Eigen::Index>(f.lo)];
        const double eb = state.e[static_cast<Eigen::Index>(f.hi)];
        const double gm = 0.5 * (data.heat_factor[static_cast<Eigen::Index>(f.lo)] +
                                 data.heat_factor[static_cast<Eigen::Index>(f.hi)]);
        const FaceSecant B = face_secant(model, ua, ub, ea, eb, gm);
        if (!(B.schur > 1e-12 * B.schur_scale)) throw NumericalError("secant mobility is not positive definite");
        const SecantQuadratic q = secant_quadratic(B, face_entropy_jump(model, data, f.lo, f.hi, ua, ub, ea, eb));
        P.P_n += q.species[0];
        for (Eigen::Index i = 1; i < I; ++i) P.P_p += q.species[i];
        P.P_e += q.energy;
    }
    const double fs = face_scale(g);
    P.P_n *= fs;
    P.P_p *= fs;
    P.P_e *= fs;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Eigen::VectorXd u = cell_u(k);
        const double e = state.e[static_cast<Eigen::Index>(k)];
        const Point x = g.center(k);
        Eigen::VectorXd w(I);
        for (Eigen::Index i = 0; i < I; ++i) w[i] = model.weight(static_cast<std::size_t>(i), x, e);
        P.P_R += reaction_dissipation(scenario.network, u, w, scenario.network.k_star(u, e));
    }
    P.P_R *= g.cell_volume();
    P.P_total = scenario.kappa * (P.P_n + P.P_p + P.P_e) + P.P_R;
    return P;
}

ProductionComponents entropy_production(const StateField& state, const Scenario& scenario,
                                        const EquilibriumState& eq) {
    switch (scenario.kind) {
        case ScenarioKind::torus: return entropy_production_torus(state, scenario, eq);
        case ScenarioKind::confined: return entropy_production_confined(state, scenario, eq);
        case ScenarioKind::general: return entropy_production_general(state, scenario, eq);
    }
    throw ArgumentError("unknown scenario kind");
}

double relative_entropy(const StateField& state, const Scenario& scenario, const EquilibriumState& eq) {
    switch (scenario.kind) {
        case ScenarioKind::torus: return relative_entropy_torus(state, eq, scenario.model);
        case ScenarioKind::confined: return relative_entropy_confined(state, eq, scenario.model);
        case ScenarioKind::general: return relative_entropy_general(state, eq, scenario.model).total();
    }
    throw ArgumentError("unknown scenario kind");
}

double confined_integrand_first_form(const ConfinedPoint& q, const ConfinedParameters& par) {
    const Point ln_e = {q.grad_e[0] / q.e, q.grad_e[1] / q.e};
    const Point ln_es = {q.grad_es[0] / q.es, q.grad_es[1] / q.es};
    const Point ln_ratio = operator_sub(ln_e, ln_es);
    auto density_term = [&](double u, const Point& gu) {
        // grad log(u / (C sqrt(e e*))) = grad u / u - (grad log e + grad log e*) / 2
        const Point v = {gu[0] / u - 0.5 * (ln_e[0] + ln_es[0]), gu[1] / u - 0.5 * (ln_e[1] + ln_es[1])};
        return u * dot(v, v);
    };
    const double N = q.n + q.p + par.c * std::sqrt(q.e * q.es);
    const double diffusive = density_term(q.n, q.grad_n) + density_term(q.p, q.grad_p) + 0.25 * N * dot(ln_ratio, ln_ratio);
    const double y = q.n * q.p / (par.C_n * par.C_p * q.e * q.es);
    return par.kappa * diffusive + par.k * q.e * reaction_log_term(y);
}

double confined_integrand_second_form(const ConfinedPoint& q, const ConfinedParameters& par) {
    const Point ln_e = {q.grad_e[0] / q.e, q.grad_e[1] / q.e};
    const Point ln_es = {q.grad_es[0] / q.es, q.grad_es[1] / q.es};
    auto density_term = [&](double u, const Point& gu) {
        const Point ln_u = {gu[0] / u, gu[1] / u};
        const Point a = operator_sub(ln_u, ln_es);
        const Point b = operator_sub(ln_u, ln_e);
        return 0.5 * u * dot(a, a) + 0.5 * u * dot(b, b);
    };
    // grad log sqrt(e/e*)
    const Point half = {0.5 * (ln_e[0] - ln_es[0]), 0.5 * (ln_e[1] - ln_es[1])};
    const double energy = par.c * q.es * std::sqrt(q.e / q.es) * dot(half, half);
    const double diffusive = density_term(q.n, q.grad_n) + density_term(q.p, q.grad_p) + energy;
    const double y = q.n * q.p / (par.C_n * par.C_p * q.e * q.es);
    return par.kappa * diffusive + par.k * q.e * reaction_log_term(y);
}

ResidualReport dissipation_residual(const std::vector<Record>& series, double floor) {
    if (series.size() < 3) throw ArgumentError("dissipation residual needs at least three records");
    const double dt = series[1].t - series[0].t;
    if (!(dt > 0.0)) throw ArgumentError("records must be strictly increasing in time");
    double pmax = 0.0;
    for (std::size_t k = 1; k < series.size(); ++k) {
        const double d = series[k].t - series[k - 1].t;
        if (std::abs(d - dt) > 1e-9 * dt) throw ArgumentError("records are not at a uniform cadence");
        pmax = std::max(pmax, series[k].P_mid.P_total);
    }
    ResidualReport rep;
    for (std::size_t k = 0; k + 1 < series.size(); ++k) {
        const double pm = series[k + 1].P_mid.P_total;
        const double r = (series[k + 1].H - series[k].H) / dt + pm;
        rep.absolute.push_back(r);
        rep.max_absolute = std::max(rep.max_absolute, std::abs(r));
        if (pm > floor * pmax && pm > 0.0) {
            const double rel = std::abs(r) / pm;
            rep.relative.push_back(rel);
            rep.max_relative = std::max(rep.max_relative, rel);
        } else {
            rep.relative.push_back(std::numeric_limits<double>::quiet_NaN());
            ++rep.skipped;
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------------------------
// Functional constants

WeightedMeasure weighted_measure(const Grid& g, const Field* weight) {
    const auto N = static_cast<Eigen::Index>(g.size());
    Field w = weight ? *weight : Field::Constant(N, 1.0 / g.measure());
    if (w.size() != N) throw ArgumentError("weight size does not match the grid");
    for (Eigen::Index i = 0; i < N; ++i) {
        if (!(w[i] > 0.0) || !std::isfinite(w[i])) throw DomainError("weight must be positive and finite");
    }
    const double mass = g.integrate(w);
    if (std::abs(mass - 1.0) > 1e-8) throw ArgumentError("weight must have unit mass");
    WeightedMeasure F;
    F.nu = w * g.cell_volume();
    F.face_w.resize(static_cast<Eigen::Index>(g.faces().size()));
    std::vector<Eigen::Triplet<double>> trip;
    const double fs = face_scale(g);
    for (std::size_t k = 0; k < g.faces().size(); ++k) {
        const Face& f = g.faces()[k];
        const double wf = 0.5 * (w[static_cast<Eigen::Index>(f.lo)] + w[static_cast<Eigen::Index>(f.hi)]);
        F.face_w[static_cast<Eigen::Index>(k)] = wf;
        const double a = wf * fs;
        const auto lo = static_cast<Eigen::Index>(f.lo);
        const auto hi = static_cast<Eigen::Index>(f.hi);
        trip.emplace_back(lo, lo, a);
        trip.emplace_back(hi, hi, a);
        trip.emplace_back(lo, hi, -a);
        trip.emplace_back(hi, lo, -a);
    }
    F.L.resize(N, N);
    F.L.setFromTriplets(trip.begin(), trip.end());
    return F;
}

double dirichlet_form(const Grid& g, const WeightedMeasure& F, const Field& f) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.faces().size(); ++k) {
        const Face& fc = g.faces()[k];
        s += F.face_w[static_cast<Eigen::Index>(k)] *
             sq(f[static_cast<Eigen::Index>(fc.hi)] - f[static_cast<Eigen::Index>(fc.lo)]);
    }
    return s * face_scale(g);
}

namespace {

double ls_quotient(const Grid& g, const WeightedMeasure& F, const Field& f) {
    const double mean = F.nu.dot(f);
    if (!(mean > 0.0)) return 0.0;
    double num = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        if (f[i] > 0.0) num += F.nu[i] * f[i] * std::log(f[i] / mean);
    }
    const double den = dirichlet_form(g, F, f.cwiseMax(0.0).cwiseSqrt());
    if (!(den > 1e-300)) return 0.0;
    return num / den;
}

double sobolev_quotient_impl(const Grid& g, const WeightedMeasure& F, const Field& f) {
    const double l4 = std::sqrt(F.nu.dot(f.array().square().square().matrix()));
    const double l2 = F.nu.dot(f.cwiseProduct(f));
    const double den = dirichlet_form(g, F, f);
    if (!(den > 1e-300)) return 0.0;
    return (l4 - l2) / den;
}

// First nonconstant eigenpair of L v = lambda W v by shifted inverse iteration with deflation of
// constants; W = diag(nu).
std::pair<double, Field> first_eigenpair(const Grid& g, const WeightedMeasure& F) {
    const auto N = static_cast<Eigen::Index>(g.size());
    Field v = g.sample_with([&](const Point& x) {
        if (g.domain() == Domain::torus) return std::cos(2.0 * M_PI * x[0]) + 0.3 * std::sin(2.0 * M_PI * x[1]);
        const double L = g.half_width();
        return std::cos(M_PI * (x[0] + L) / (2.0 * L)) + 0.3 * std::cos(M_PI * (x[1] + L) / (2.0 * L));
    });
    for (Eigen::Index i = 0; i < N; ++i) v[i] += 1e-3 * std::sin(12.9898 * static_cast<double>(i) + 0.5);
    auto deflate = [&](Field& x) {
        x.array() -= F.nu.dot(x);
        const double nrm = std::sqrt(F.nu.dot(x.cwiseProduct(x)));
        if (!(nrm > 0.0)) throw NumericalError("eigen-solve lost its iterate");
        x /= nrm;
    };
    deflate(v);
    double rq = v.dot(F.L * v);
    Eigen::SparseMatrix<double> A = F.L;
    const double shift = 0.1 * rq;
    for (Eigen::Index i = 0; i < N; ++i) A.coeffRef(i, i) += shift * F.nu[i];
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw NumericalError("eigen-solve factorization failed");
    double prev = rq;
    for (int it = 0; it < 3000; ++it) {
        Field x = lu.solve(F.nu.cwiseProduct(v));
        if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalError("eigen-solve failed");
        deflate(x);
        v = x;
        rq = v.dot(F.L * v);
        if (it > 3 && std::abs(rq - prev) <= 1e-15 * rq) return {rq, v};
        prev = rq;
    }
    if (std::abs(rq - prev) <= 1e-10 * rq) return {rq, v};
    throw NumericalError("eigen-solve did not converge");
}

std::vector<Field> trial_basis(const Grid& g, const Field& eigvec) {
    std::vector<Field> basis;
    auto add = [&](Field f) {
        const double m = f.cwiseAbs().maxCoeff();
        if (m > 0.0) basis.push_back(f / m);
    };
    add(eigvec);
    for (int axis = 0; axis < g.dim(); ++axis) {
        if (g.domain() == Domain::torus) {
            for (int k = 1; k <= 4; ++k) {
                add(g.sample_with([&](const Point& x) { return std::cos(2.0 * M_PI * k * x[axis]); }));
                add(g.sample_with([&](const Point& x) { return std::sin(2.0 * M_PI * k * x[axis]); }));
            }
        } else {
            const double L = g.half_width();
            for (int k = 1; k <= 6; ++k) {
                add(g.sample_with([&](const Point& x) { return std::cos(k * M_PI * (x[axis] + L) / (2.0 * L)); }));
            }
            for (double w : {0.5, 1.0, 2.0}) {
                add(g.sample_with([&](const Point& x) { return std::tanh(x[axis] / w); }));
            }
            for (double c : {-0.5 * L, -0.2 * L, 0.0, 0.2 * L, 0.5 * L}) {
                add(g.sample_with([&](const Point& x) { return std::exp(-sq((x[axis] - c) / (0.1 * L))); }));
            }
        }
    }
    if (g.dim() == 2) {
        if (g.domain() == Domain::torus) {
            add(g.sample_with([](const Point& x) { return std::cos(2.0 * M_PI * (x[0] + x[1])); }));
        } else {
            add(g.sample_with([](const Point& x) { return std::tanh(x[0] + x[1]); }));
        }
    }
    return basis;
}

// Maximizes q(offset + sum a_j phi_j) over random sparse coefficient vectors, then refines the best
// by coordinate search.
template <class Quotient>
double maximize_quotient(const std::vector<Field>& basis, Quotient&& q, bool random_offset, int trials, int rounds,
                         std::mt19937_64& rng, double seed_value) {
    const std::size_t B = basis.size();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, B - 1);
    auto build = [&](double offset, const std::vector<double>& a) {
        Field f = Field::Constant(basis[0].size(), offset);
        for (std::size_t j = 0; j < B; ++j) {
            if (a[j] != 0.0) f += a[j] * basis[j];
        }
        return f;
    };
    double best = seed_value;
    double best_offset = 1.0;
    std::vector<double> best_a(B, 0.0);
    for (int t = 0; t < trials; ++t) {
        std::vector<double> a(B, 0.0);
        const int terms = 1 + static_cast<int>(unit(rng) * 3.0);
        for (int j = 0; j < terms; ++j) {
            const double mag = std::pow(10.0, -2.0 + 2.0 * unit(rng));
            a[pick(rng)] = unit(rng) < 0.5 ? -mag : mag;
        }
        const double offset = random_offset ? std::pow(10.0, -1.3 + 2.0 * unit(rng)) : 1.0;
        const double v = q(build(offset, a));
        if (std::isfinite(v) && v > best) {
            best = v;
            best_a = a;
            best_offset = offset;
        }
    }
    double step = 0.3;
    for (int r = 0; r < rounds; ++r, step *= 0.6) {
        for (std::size_t j = 0; j < B; ++j) {
            for (double delta : {step, -step}) {
                std::vector<double> a = best_a;
                a[j] = a[j] == 0.0 ? delta * 0.1 : a[j] * (1.0 + delta);
                const double v = q(build(best_offset, a));
                if (std::isfinite(v) && v > best) {
                    best = v;
                    best_a = a;
                }
            }
        }
        if (random_offset) {
            for (double delta : {step, -step}) {
                const double off = best_offset * (1.0 + delta);
                const double v = q(build(off, best_a));
                if (std::isfinite(v) && v > best) {
                    best = v;
                    best_offset = off;
                }
            }
        }
    }
    return best;
}

}  // namespace

double poincare_constant(const Grid& grid, const Field* weight) {
    const WeightedMeasure F = weighted_measure(grid, weight);
    return 1.0 / first_eigenpair(grid, F).first;
}

double log_sobolev_quotient(const Grid& grid, const Field& weight, const Field& f) {
    return ls_quotient(grid, weighted_measure(grid, &weight), f);
}

double sobolev_quotient(const Grid& grid, const Field& weight, const Field& f) {
    return sobolev_quotient_impl(grid, weighted_measure(grid, &weight), f);
}

FunctionalConstants estimate_functional_constants(const Grid& grid, const Field* weight,
                                                  const ConstantOptions& options) {
    const WeightedMeasure F = weighted_measure(grid, weight);
    const auto [lambda1, phi] = first_eigenpair(grid, F);
    FunctionalConstants out;
    out.C_P = 1.0 / lambda1;
    const std::vector<Field> basis = trial_basis(grid, phi);
    const Field phi_n = basis[0];
    const Field ones = Field::Ones(phi_n.size());

    std::mt19937_64 rng(options.seed);
    // Small-amplitude quotients tend to 2 C_P for both inequalities.
    const Field g0 = ones + 1e-3 * phi_n;
    const double ls0 = ls_quotient(grid, F, g0.cwiseProduct(g0));
    out.C_LS = maximize_quotient(
        basis, [&](const Field& g) { return ls_quotient(grid, F, g.cwiseProduct(g)); }, false, options.random_trials,
        options.search_rounds, rng, ls0);
    const double s0 = sobolev_quotient_impl(grid, F, g0);
    out.C_S = maximize_quotient(
        basis, [&](const Field& f) { return sobolev_quotient_impl(grid, F, f); }, true, options.random_trials,
        options.search_rounds, rng, s0);
    out.trial_based = true;
    return out;
}

double log_sobolev_estimate(const Grid& grid, const Field& weight, std::uint64_t seed) {
    const WeightedMeasure F = weighted_measure(grid, &weight);
    const auto [lambda1, phi] = first_eigenpair(grid, F);
    (void)lambda1;
    const Field phi_n = phi / phi.cwiseAbs().maxCoeff();
    const Field g0 = Field::Ones(phi.size()) + 1e-3 * phi_n;
    double best = ls_quotient(grid, F, g0.cwiseProduct(g0));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-0.8, 0.8);
    for (int t = 0; t < 6; ++t) {
        const Field g = Field::Ones(phi.size()) + amp(rng) * phi_n;
        best = std::max(best, ls_quotient(grid, F, g.cwiseProduct(g)));
    }
    return best;
}

// ---------------------------------------------------------------------------------------------
// Constant chain

namespace {

void check_averages(double n_bar, double p_bar, double n_star, double p_star) {
    for (double v : {n_bar, p_bar, n_star, p_star}) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("averages and equilibrium values must be positive");
    }
}

}  // namespace

double c1_bracket(double n_bar, double p_bar, double n_star, double p_star) {
    check_averages(n_bar, p_bar, n_star, p_star);
    const double rn = n_bar / n_star;
    const double rp = p_bar / p_star;
    const double ln_n = 1.0 + std::abs(std::log(rn));
    const double ln_p = 1.0 + std::abs(std::log(rp));
    if (rn >= 0.25 && rp >= 0.25) return 2.0 * std::max(ln_n, ln_p);
    if (rp >= 0.25) return 2.0 * ln_p;
    if (rn >= 0.25) return 2.0 * ln_n;
    return 2.0;
}

double c2_transfer(double n_bar, double p_bar, double n_star, double p_star) {
    check_averages(n_bar, p_bar, n_star, p_star);
    return p_star + p_star * p_star / n_star + 2.0 * n_star / std::max(p_bar / p_star, n_bar / n_star);
}

double c0_product(double n_bar, double p_bar, double n_star, double p_star) {
    return c1_bracket(n_bar, p_bar, n_star, p_star) * c2_transfer(n_bar, p_bar, n_star, p_star);
}

EepConstant eep_constant(const EepInputs& in) {
    if (!(in.c > 0.0)) {
        throw ModelIncompatible("the entropy-production constant needs c > 0 (the Sobolev step divides by c)");
    }
    for (double v : {in.kappa, in.k0, in.e_star}) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("kappa, k0 and e* must be positive");
    }
    for (double v : {in.C_P, in.C_S, in.C_LS, in.C_LS_weighted}) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("functional constants must be non-negative");
    }
    EepConstant out;
    out.c1_bracket = c1_bracket(in.n_bar, in.p_bar, in.n_star, in.p_star);
    out.c2_transfer = c2_transfer(in.n_bar, in.p_bar, in.n_star, in.p_star);
    out.c0_product = out.c1_bracket * out.c2_transfer;
    const double se = std::sqrt(in.e_star);
    const double m = std::max({1.0, 2.0 * in.C_S * in.k0 * se / (in.c * in.kappa),
                               (in.k0 / 4.0 + 4.0) * in.C_P * (in.n_bar + in.p_bar) / in.kappa});
    out.c_one_chain = 2.0 / (in.e_star * in.k0) * out.c0_product * m;
    const double ls = std::max(in.C_LS, in.C_LS_weighted);
    out.K = std::max({in.kappa * out.c_one_chain, ls, in.C_S / 4.0}) / in.kappa;
    out.K_chain_sum = out.c_one_chain + std::max(ls, in.C_S) / (4.0 * in.kappa);
    return out;
}

DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& H, double transient) {
    if (t.size() != H.size()) throw ArgumentError("time and entropy series differ in length");
    const auto start = static_cast<std::size_t>(std::floor(transient * static_cast<double>(t.size())));
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t k = start; k < t.size(); ++k) {
        if (!(H[k] > 1e-300)) break;
        x.push_back(t[k]);
        y.push_back(std::log(H[k]));
    }
    if (x.size() < 2) throw ArgumentError("decay fit needs at least two positive entropy values");
    const double nx = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= nx;
    my /= nx;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += sq(x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += sq(y[k] - my);
    }
    if (!(sxx > 0.0)) throw ArgumentError("decay fit needs distinct times");
    const double slope = sxy / sxx;
    DecayFit fit;
    fit.k_fit = -slope;
    const double ss_res = std::max(0.0, syy - slope * sxy);
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.points = x.size();
    return fit;
}

double decay_bound_ratio(const std::vector<double>& t, const std::vector<double>& H, double K_hat) {
    if (t.size() != H.size() || t.empty()) throw ArgumentError("decay bound needs matching non-empty series");
    if (!(K_hat > 0.0)) throw DomainError("decay bound needs a positive constant");
    if (!(H[0] > 0.0)) return 0.0;
    double worst = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        worst = std::max(worst, H[k] / (H[0] * std::exp(-(t[k] - t[0]) / K_hat)));
    }
    return worst;
}

L1Bound l1_convergence_bound(const StateField& state, const EquilibriumState& eq, const EntropyModel& model) {
    require_bipolar(state);
    const Grid& g = *state.grid;
    L1Bound out;
    double sqrt_e_l1 = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        out.l1_n += std::abs(state.u[0][i] - eq.u_at(0, k));
        out.l1_p += std::abs(state.u[1][i] - eq.u_at(1, k));
        out.l2_sqrt_e += sq(std::sqrt(state.e[i]) - std::sqrt(eq.e_at(k)));
        sqrt_e_l1 += std::sqrt(state.e[i]);
    }
    const double vol = g.cell_volume();
    out.l1_n *= vol;
    out.l1_p *= vol;
    out.l2_sqrt_e = std::sqrt(out.l2_sqrt_e * vol);
    sqrt_e_l1 *= vol;
    out.lhs = sq(out.l1_n) + sq(out.l1_p) + sq(out.l2_sqrt_e);
    const double n_bar = g.integrate(state.u[0]);
    const double p_bar = g.integrate(state.u[1]);
    const bool constant_eq = eq.e_star.size() == 1;
    const double e_star = constant_eq ? eq.e_star[0] : eq.E0 / g.measure();
    out.C = std::max(2.0 / 3.0 * (2.0 * (n_bar + p_bar) + 4.0 * (eq.C_n + eq.C_p) * sqrt_e_l1),
                     2.0 * std::sqrt(e_star) * (1.0 + 2.0 * sq(eq.C_n) + 2.0 * sq(eq.C_p)) /
                         (model.c + eq.C_n + eq.C_p));
    out.H = constant_eq ? relative_entropy_torus(state, eq, model) : relative_entropy_confined(state, eq, model);
    out.holds = out.lhs <= out.C * out.H + 1e-12 * std::max(1.0, out.lhs);
    return out;
}

// ---------------------------------------------------------------------------------------------
// Per-run engine

DiagnosticsEngine::DiagnosticsEngine(const Scenario& scenario, const DiagnosticsOptions& options)
    : scenario_(scenario), options_(options) {
    if (!scenario.equilibrium) throw ArgumentError("scenario has not been finalized");
    eep_active_ = options.eep && scenario.kind != ScenarioKind::general;
    if (eep_active_ && !(scenario.model.c > 0.0)) {
        throw ModelIncompatible("the entropy-production estimate needs c > 0");
    }
    if (options.constants_given) {
        constants_ = options.given;
        constants_.trial_based = false;
    } else if (scenario.kind == ScenarioKind::confined) {
        const Field w = scenario.equilibrium->e_star;
        constants_ = estimate_functional_constants(*scenario.grid, &w, options.constant_options);
    } else {
        constants_ = estimate_functional_constants(*scenario.grid, nullptr, options.constant_options);
    }
}

EepInputs DiagnosticsEngine::eep_inputs(const StateField& state) const {
    const Grid& g = *state.grid;
    const EquilibriumState& eq = *scenario_.equilibrium;
    EepInputs in;
    in.n_bar = g.integrate(state.u[0]);
    in.p_bar = g.integrate(state.u[1]);
    if (scenario_.kind == ScenarioKind::torus) {
        in.n_star = eq.u_at(0, 0);
        in.p_star = eq.u_at(1, 0);
        in.e_star = eq.e_at(0);
    } else {
        in.n_star = eq.C_n;
        in.p_star = eq.C_p;
        in.e_star = 1.0;
    }
    in.kappa = scenario_.kappa;
    in.k0 = scenario_.rate.lower_bound(state.u[0].maxCoeff(), state.u[1].maxCoeff());
    in.c = scenario_.model.c;
    in.C_P = constants_.C_P;
    in.C_S = constants_.C_S;
    in.C_LS = constants_.C_LS;
    if (options_.per_record_log_sobolev) {
        Field w = scenario_.kind == ScenarioKind::torus ? Field(state.e / eq.e_at(0)) : Field(state.e);
        w /= g.integrate(w);
        in.C_LS_weighted = log_sobolev_estimate(g, w, options_.constant_options.seed);
    }
    return in;
}

Record DiagnosticsEngine::record(double t, const StateField& state, const StateField* previous) const {
    const EquilibriumState& eq = *scenario_.equilibrium;
    const Grid& g = *state.grid;
    Record r;
    r.t = t;
    r.H = relative_entropy(state, scenario_, eq);
    r.P = entropy_production(state, scenario_, eq);
    if (previous) {
        StateField mid = state;
        for (std::size_t i = 0; i < mid.u.size(); ++i) mid.u[i] = 0.5 * (state.u[i] + previous->u[i]);
        mid.e = 0.5 * (state.e + previous->e);
        r.P_mid = entropy_production(mid, scenario_, eq);
    } else {
        r.P_mid = r.P;
    }
    r.mass_n = g.integrate(state.u[0]);
    r.mass_p = state.u.size() > 1 ? g.integrate(state.u[1]) : 0.0;
    r.mass_diff = r.mass_n - r.mass_p;
    r.energy = g.integrate(state.e);
    r.e_min = state.e.minCoeff();
    r.e_max = state.e.maxCoeff();
    r.e_ratio_min = std::numeric_limits<double>::infinity();
    r.e_ratio_max = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double ratio = state.e[static_cast<Eigen::Index>(k)] / eq.e_at(k);
        r.e_ratio_min = std::min(r.e_ratio_min, ratio);
        r.e_ratio_max = std::max(r.e_ratio_max, ratio);
    }
    r.n_min = state.u[0].minCoeff();
    r.p_min = state.u.size() > 1 ? state.u[1].minCoeff() : 0.0;
    if (eep_active_) r.K = eep_constant(eep_inputs(state)).K;
    return r;
}

DiagnosticsReport DiagnosticsEngine::finish(std::vector<Record> series, const StateField& initial,
                                            const StateField& final_state) const {
    DiagnosticsReport rep;
    rep.series = std::move(series);
    rep.constants = constants_;
    if (constants_.trial_based) rep.flags.emplace_back("trial-based-constants");
    const auto& s = rep.series;
    if (eep_active_ && !s.empty()) {
        rep.K_formula = s.front().K;
        for (const auto& r : s) rep.K_hat = std::max(rep.K_hat, r.K);
        for (const auto& r : s) {
            if (r.P.P_total > 0.0) {
                rep.eep_worst_ratio = std::max(rep.eep_worst_ratio, r.H / (rep.K_hat * r.P.P_total));
            } else if (r.H > 0.0) {
                rep.eep_worst_ratio = std::numeric_limits<double>::infinity();
            }
        }
    } else {
        rep.flags.emplace_back("eep-not-evaluated");
    }
    if (s.size() >= 3) {
        rep.max_dissipation_residual = dissipation_residual(s).max_relative;
        std::vector<double> t;
        std::vector<double> H;
        for (const auto& r : s) {
            t.push_back(r.t);
            H.push_back(r.H);
        }
        try {
            const DecayFit fit = fit_decay_rate(t, H);
            rep.k_fit = fit.k_fit;
            rep.r_squared = fit.r_squared;
        } catch (const ArgumentError&) {
            rep.flags.emplace_back("decay-fit-unavailable");
        }
        if (eep_active_ && rep.K_hat > 0.0) rep.decay_bound_ratio = decay_bound_ratio(t, H, rep.K_hat);
    } else {
        rep.flags.emplace_back("too-few-records");
    }
    if (scenario_.kind != ScenarioKind::general) {
        const EquilibriumState& eq = *scenario_.equilibrium;
        rep.ckp_prefactor = l1_convergence_bound(initial, eq, scenario_.model).C;
        rep.final_L1 = l1_convergence_bound(final_state, eq, scenario_.model);
    }
    return rep;
}

}  // namespace erds
