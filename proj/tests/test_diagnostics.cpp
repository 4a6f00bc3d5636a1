#include "erds/config.hpp"
#include "erds/diagnostics.hpp"
#include "erds/inequalities.hpp"
#include "erds/relative_entropy.hpp"

#include "generators.hpp"

#include <doctest.h>

using namespace erds;
using erds::testing::Gen;
using erds::testing::rel_err;

namespace {

Config load(const char* name) { return load_config(std::string(ERDS_CONFIG_DIR) + "/" + name); }

StateField uniform_state(const GridPtr& g, double n, double p, double e) {
    const auto N = static_cast<Eigen::Index>(g->size());
    return StateField{g, {Field::Constant(N, n), Field::Constant(N, p)}, Field::Constant(N, e)};
}

double discrete_torus_poincare(int N) {
    const double h = 1.0 / N;
    return 1.0 / (4.0 / (h * h) * std::pow(std::sin(M_PI * h), 2));
}

}  // namespace

TEST_CASE("reaction production of a homogeneous state") {
    Config c = load("torus_default.yaml");
    c.grid.n_cells = 16;
    c.initial.species = {{"constant", 2.0, 0.0, 1}, {"constant", 2.0, 0.0, 1}};
    c.initial.energy = {"constant", 1.0, 0.0, 1};
    const Scenario s = build_scenario(c);
    const ProductionComponents P = entropy_production_torus(s.initial, s, *s.equilibrium);
    CHECK(P.P_R == doctest::Approx(4.1588830833596719).epsilon(1e-14));
    CHECK(P.P_n == 0.0);
    CHECK(P.P_p == 0.0);
    CHECK(P.P_e == 0.0);
    CHECK(P.P_total == doctest::Approx(4.1588830833596719).epsilon(1e-14));
}

TEST_CASE("reaction log term") {
    CHECK(reaction_log_term(1.0) == 0.0);
    CHECK(reaction_log_term(4.0) == doctest::Approx(4.1588830833596719).epsilon(1e-15));
    CHECK(rel_err(reaction_log_term(1.0 + 1e-10), 1e-20) < 1e-6);
    CHECK_THROWS_AS(reaction_log_term(0.0), DomainError);
}

TEST_CASE("the two confined integrand forms agree pointwise") {
    Gen g(51);
    for (int trial = 0; trial < 10000; ++trial) {
        ConfinedPoint q;
        q.n = g.log_uniform(1e-3, 1e3);
        q.p = g.log_uniform(1e-3, 1e3);
        q.e = g.log_uniform(1e-3, 1e3);
        q.es = g.log_uniform(1e-3, 1e3);
        for (Point* v : {&q.grad_n, &q.grad_p, &q.grad_e, &q.grad_es}) *v = {g.uniform(-5, 5), g.uniform(-5, 5)};
        ConfinedParameters par;
        par.c = g.log_uniform(0.1, 10.0);
        par.C_n = g.log_uniform(0.1, 10.0);
        par.C_p = 1.0 / par.C_n;
        par.k = g.log_uniform(0.1, 10.0);
        par.kappa = g.log_uniform(1e-2, 10.0);
        const double a = confined_integrand_first_form(q, par);
        const double b = confined_integrand_second_form(q, par);
        REQUIRE(a >= 0.0);
        REQUIRE(rel_err(a, b) <= 1e-8);
    }
}

TEST_CASE("confined production converges to the integrand quadrature") {
    const auto grid = Grid::box(1, 1024, 6.0);
    const auto V = harmonic_potential(1.0, 0.25 * std::log(M_PI));
    const EquilibriumState eq = confined_equilibrium(grid, V, 0.4, 1.0);
    Scenario s;
    s.kind = ScenarioKind::confined;
    s.grid = grid;
    s.model = confined_model(1.0, V);
    s.kappa = 0.7;
    // smooth fields with analytic gradients
    auto es = [](double x) { return std::exp(-x * x) / std::sqrt(M_PI); };
    auto des = [&](double x) { return -2 * x * es(x); };
    auto fn = [&](double x) { return eq.C_n * es(x) * (1.0 + 0.3 * std::sin(x)); };
    auto dfn = [&](double x) { return eq.C_n * (des(x) * (1.0 + 0.3 * std::sin(x)) + es(x) * 0.3 * std::cos(x)); };
    auto fp = [&](double x) { return eq.C_p * es(x) * (1.0 + 0.2 * std::cos(2 * x)); };
    auto dfp = [&](double x) {
        return eq.C_p * (des(x) * (1.0 + 0.2 * std::cos(2 * x)) - es(x) * 0.4 * std::sin(2 * x));
    };
    auto fe = [&](double x) { return es(x) * (1.0 + 0.25 * std::tanh(x)); };
    auto dfe = [&](double x) { return des(x) * (1.0 + 0.25 * std::tanh(x)) + es(x) * 0.25 / std::pow(std::cosh(x), 2); };
    StateField st{grid,
                  {grid->sample_with([&](const Point& x) { return fn(x[0]); }),
                   grid->sample_with([&](const Point& x) { return fp(x[0]); })},
                  grid->sample_with([&](const Point& x) { return fe(x[0]); })};
    const ProductionComponents P = entropy_production_confined(st, s, eq);
    ConfinedParameters par;
    par.c = 1.0;
    par.C_n = eq.C_n;
    par.C_p = eq.C_p;
    par.k = 1.0;
    par.kappa = s.kappa;
    double quad = 0.0;
    for (std::size_t k = 0; k < grid->size(); ++k) {
        const double x = grid->center(k)[0];
        ConfinedPoint q;
        q.n = fn(x);
        q.p = fp(x);
        q.e = fe(x);
        q.es = es(x);
        q.grad_n = {dfn(x), 0};
        q.grad_p = {dfp(x), 0};
        q.grad_e = {dfe(x), 0};
        q.grad_es = {des(x), 0};
        quad += confined_integrand_second_form(q, par) * grid->cell_volume();
    }
    CHECK(rel_err(P.P_total, quad) <= 1e-4);
}

TEST_CASE("confined production with a constant potential equals the torus production") {
    Gen g(52);
    const auto grid = Grid::box(1, 64, 0.5);  // unit measure, so e* = 1
    const auto N = static_cast<Eigen::Index>(grid->size());
    for (int trial = 0; trial < 50; ++trial) {
        const double c = g.log_uniform(0.1, 10.0);
        EquilibriumState eq = solve_torus_equilibrium(g.uniform(-2, 2), 1.0, c);
        EquilibriumState eqc = eq;
        eqc.e_star = Field::Ones(N);
        eqc.u_star = {Field::Constant(N, eq.C_n), Field::Constant(N, eq.C_p)};
        eqc.V = Field::Zero(N);
        Scenario st;
        st.kind = ScenarioKind::torus;
        st.grid = grid;
        st.model = torus_model(c);
        st.kappa = g.log_uniform(1e-2, 1.0);
        st.rate.k = g.log_uniform(0.1, 10.0);
        Scenario sc = st;
        sc.kind = ScenarioKind::confined;
        sc.model = confined_model(c, harmonic_potential(0.0, 0.0));
        const StateField x{grid, {g.smooth_field(*grid, 1.0, 1.0), g.smooth_field(*grid, 0.7, 1.0)},
                           g.smooth_field(*grid, 1.0, 1.0)};
        const ProductionComponents a = entropy_production_torus(x, st, eq);
        const ProductionComponents b = entropy_production_confined(x, sc, eqc);
        REQUIRE(rel_err(a.P_total, b.P_total) <= 1e-8);
        REQUIRE(rel_err(a.P_e, b.P_e) <= 1e-8);
        REQUIRE(rel_err(a.P_R, b.P_R) <= 1e-8);
    }
}

TEST_CASE("constant chain spot values") {
    CHECK(c1_bracket(1, 1, 1, 1) == 2.0);
    CHECK(c2_transfer(1, 1, 1, 1) == 4.0);
    CHECK(c0_product(1, 1, 1, 1) == 8.0);
    // at the equilibrium averages C0 = 2 (p* + p*^2/n* + 2n*)
    CHECK(c0_product(2.0, 0.5, 2.0, 0.5) == doctest::Approx(2.0 * (0.5 + 0.125 + 4.0)));
    EepInputs in;
    in.C_P = in.C_LS = in.C_S = 0.05;
    in.c = 0.0;
    CHECK_THROWS_AS(eep_constant(in), ModelIncompatible);
    in.c = 1.0;
    const EepConstant K = eep_constant(in);
    CHECK(K.c0_product == 8.0);
    CHECK(K.K > 0.0);
    CHECK(K.K_chain_sum >= K.K * (1 - 1e-15));
}

TEST_CASE("Poincare constant of the unit circle") {
    double prev_err = 0.0;
    for (int N : {32, 64, 128}) {
        const auto g = Grid::torus(1, N);
        const double CP = poincare_constant(*g, nullptr);
        CHECK(rel_err(CP, discrete_torus_poincare(N)) <= 1e-9);
        const double err = rel_err(CP, 0.025330295910584443);
        CHECK(err <= 0.5 * std::pow(M_PI / N, 2));
        if (prev_err > 0.0) CHECK(prev_err / err == doctest::Approx(4.0).epsilon(0.01));
        prev_err = err;
    }
}

TEST_CASE("functional constants: linearization bound and sample inequalities") {
    const auto g = Grid::torus(1, 128);
    const FunctionalConstants fc = estimate_functional_constants(*g, nullptr);
    CHECK(fc.trial_based);
    CHECK(fc.C_LS >= 2.0 * fc.C_P * (1 - 1e-4));
    CHECK(fc.C_S >= 2.0 * fc.C_P * (1 - 1e-4));

    const Field f = g->sample_with([](const Point& x) { return 1.0 + 0.5 * std::cos(2 * M_PI * x[0]); });
    const InequalityCheck ls = check_log_sobolev(*g, f, nullptr, fc.C_LS);
    CHECK(ls.holds);
    CHECK(ls.lhs > 0.0);
    const SobolevCheck sb = check_sobolev_embedding(*g, f, nullptr, fc.C_S);
    CHECK(sb.holds);
    CHECK(sb.required_C <= fc.C_S);

    Gen gen(53);
    for (int trial = 0; trial < 200; ++trial) {
        const Field r = gen.smooth_field(*g, 1.0, 2.0, 0.01);
        REQUIRE(check_log_sobolev(*g, r, nullptr, fc.C_LS).holds);
        REQUIRE(check_sobolev_embedding(*g, r, nullptr, fc.C_S).holds);
        REQUIRE(check_sobolev_embedding(*g, r, nullptr, fc.C_S).required_C <= fc.C_S);
    }
}

TEST_CASE("weighted log-Sobolev with a state-dependent weight") {
    const Scenario s = build_scenario(load("confined_default.yaml"));
    const Grid& g = *s.grid;
    Field weight = s.initial.e;  // e dx with unit mass
    const double C = log_sobolev_estimate(g, weight, 7);
    CHECK(C > 0.0);
    Gen gen(54);
    for (int trial = 0; trial < 50; ++trial) {
        const Field f = gen.smooth_field(g, 1.0, 1.0, 0.05);
        REQUIRE(check_log_sobolev(g, f, &weight, C * 1.05).holds);
    }
}

TEST_CASE("decay fit recovers an exact exponential") {
    std::vector<double> t, H;
    for (int k = 0; k <= 100; ++k) {
        t.push_back(0.05 * k);
        H.push_back(3.0 * std::exp(-2.0 * t.back()));
    }
    const DecayFit fit = fit_decay_rate(t, H);
    CHECK(fit.k_fit == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(decay_bound_ratio(t, H, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(decay_bound_ratio(t, H, 1.0) == 1.0);
    // claimed rate 4 against a true rate 2: worst at the final time, exp(2 * 5)
    CHECK(decay_bound_ratio(t, H, 0.25) == doctest::Approx(std::exp(10.0)).epsilon(1e-10));
}

TEST_CASE("dissipation residual of a synthetic series") {
    std::vector<Record> series;
    const double dt = 0.01;
    for (int k = 0; k <= 50; ++k) {
        Record r;
        r.t = k * dt;
        r.H = std::exp(-r.t);
        r.P.P_total = std::exp(-r.t);
        r.P_mid.P_total = std::exp(-(r.t - 0.5 * dt));
        series.push_back(r);
    }
    const ResidualReport rep = dissipation_residual(series);
    // (H_{k+1} - H_k)/dt + H(t_{k+1/2}) = O(dt^2)
    CHECK(rep.max_relative <= dt * dt / 12 * 1.01);
    CHECK(rep.max_relative > 0.0);
    series.resize(2);
    CHECK_THROWS_AS(dissipation_residual(series), ArgumentError);
}

TEST_CASE("L1 convergence bound spot value") {
    const auto g = Grid::torus(1, 8);
    const EquilibriumState eq = solve_torus_equilibrium(0.0, 1.0, 1.0);
    const L1Bound b = l1_convergence_bound(uniform_state(g, 2.0, 0.5, 1.0), eq, torus_model(1.0));
    CHECK(b.lhs == doctest::Approx(1.25).epsilon(1e-14));
    CHECK(b.C == doctest::Approx(26.0 / 3.0).epsilon(1e-14));
    CHECK(b.H == doctest::Approx(0.53972077083991796).epsilon(1e-14));
    CHECK(b.holds);
    CHECK(b.lhs <= b.C * b.H);
}

TEST_CASE("production components are non-negative along a run") {
    Config c = load("torus_default.yaml");
    c.run.t_end = 1.0;
    c.diagnostics.eep = false;
    const Scenario s = build_scenario(c);
    const RunResult r = run(s, run_options(c));
    for (const Record& rec : r.report.series) {
        const double scale = std::max(1.0, rec.P.P_total);
        REQUIRE(rec.P.P_n >= -1e-12 * scale);
        REQUIRE(rec.P.P_p >= -1e-12 * scale);
        REQUIRE(rec.P.P_e >= -1e-12 * scale);
        REQUIRE(rec.P.P_R >= -1e-12 * scale);
    }
    CHECK(std::find(r.report.flags.begin(), r.report.flags.end(), "eep-not-evaluated") != r.report.flags.end());
}

TEST_CASE("relative entropy average split along a run") {
    Config c = load("torus_default.yaml");
    c.run.t_end = 0.5;
    c.diagnostics.eep = false;
    const Scenario s = build_scenario(c);
    auto st = make_stepper(s);
    StateField x = s.initial;
    for (int k = 0; k < 50; ++k) {
        const double H = relative_entropy_torus(x, *s.equilibrium, s.model);
        REQUIRE(rel_err(H, relative_entropy_average_split(x, *s.equilibrium, s.model)) <= 1e-10);
        x = st->step(x, 1e-2);
    }
}

TEST_CASE("heat-only relaxation: fitted rate is twice the first eigenvalue") {
    Config c = load("torus_default.yaml");
    c.grid.n_cells = 128;
    c.network.k = 1e-14;
    c.initial.species = {{"constant", 1.0, 0.0, 1}, {"constant", 1.0, 0.0, 1}};
    c.initial.energy = {"cos", 1.0, 0.05, 1};
    c.run.dt = 1e-2;
    c.run.t_end = 3.0;
    c.diagnostics.eep = false;
    const Scenario s = build_scenario(c);
    const RunResult r = run(s, run_options(c));
    // H is quadratic in the mode amplitude, which decays at 4 pi^2 kappa
    const double expected = 8 * M_PI * M_PI * c.model.kappa;
    CHECK(rel_err(r.report.k_fit, expected) <= 0.02);
    CHECK(r.report.r_squared >= 0.999);
}

TEST_CASE("default torus run decays at least as fast as the certified rate") {
    const Config c = load("torus_default.yaml");
    const RunResult r = run(build_scenario(c), run_options(c));
    REQUIRE(r.report.K_hat > 0.0);
    CHECK(r.report.k_fit >= 1.0 / r.report.K_hat);
    CHECK(r.report.eep_worst_ratio <= 1.0);
    CHECK(r.report.final_L1.holds);
}
