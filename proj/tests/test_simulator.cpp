#include "erds/config.hpp"
#include "erds/diagnostics.hpp"
#include "erds/simulator.hpp"

#include "generators.hpp"

#include <doctest.h>

using namespace erds;
using erds::testing::Gen;

namespace {

Config load(const char* name) { return load_config(std::string(ERDS_CONFIG_DIR) + "/" + name); }

double max_diff(const StateField& a, const StateField& b) {
    double d = (a.e - b.e).cwiseAbs().maxCoeff();
    for (std::size_t i = 0; i < a.u.size(); ++i) d = std::max(d, (a.u[i] - b.u[i]).cwiseAbs().maxCoeff());
    return d;
}

double max_abs(const StateField& a) {
    double d = a.e.cwiseAbs().maxCoeff();
    for (const auto& u : a.u) d = std::max(d, u.cwiseAbs().maxCoeff());
    return d;
}

StateField equilibrium_state(const Scenario& s) {
    const auto N = static_cast<Eigen::Index>(s.grid->size());
    auto full = [N](const Field& f) { return f.size() == 1 ? Field::Constant(N, f[0]) : f; };
    return StateField{s.grid, {full(s.equilibrium->u_star[0]), full(s.equilibrium->u_star[1])},
                      full(s.equilibrium->e_star)};
}

}  // namespace

TEST_CASE("Bernoulli function") {
    CHECK(bernoulli_fn(0.0) == 1.0);
    for (double x : {1e-8, 1e-6, 1e-3, 0.5, 3.0, 40.0}) {
        REQUIRE(std::abs(bernoulli_fn(x) - bernoulli_fn(-x) + x) <= 1e-14 * std::max(1.0, x));
    }
    // both sides of the series switch
    CHECK(std::abs(bernoulli_fn(0.99e-6) - bernoulli_fn(1.01e-6)) < 1e-8);
    CHECK(bernoulli_fn(1.0) == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-15));
}

TEST_CASE("a single energy mode decays like the heat semigroup") {
    Config c = load("torus_default.yaml");
    c.network.k = 1e-14;  // reaction contributes below rounding
    c.initial.species = {{"constant", 1.0, 0.0, 1}, {"constant", 1.0, 0.0, 1}};
    c.initial.energy = {"cos", 1.0, 0.1, 1};
    c.run.t_end = 1e-3;
    c.run.dt = 1e-3;
    c.diagnostics.eep = false;
    const Scenario s = build_scenario(c);
    const StateField next = step_torus(s.initial, s, 1e-3);
    const Field mode = s.grid->sample_with([](const Point& x) { return std::cos(2 * M_PI * x[0]); });
    const double a0 = (s.initial.e.array() - 1.0).matrix().dot(mode);
    const double a1 = (next.e.array() - 1.0).matrix().dot(mode);
    const double kappa = c.model.kappa;
    const double exact = std::exp(-4 * M_PI * M_PI * kappa * 1e-3);
    CHECK(std::abs(a1 / a0 - exact) <= 2e-7);
}

TEST_CASE("equilibrium data is a fixed point of every stepper") {
    for (const char* name : {"torus_default.yaml", "confined_default.yaml"}) {
        CAPTURE(name);
        const Config c = load(name);
        const Scenario s = build_scenario(c);
        const StateField eq = equilibrium_state(s);
        auto stepper = make_stepper(s);
        const StateField next = stepper->step(eq, 1e-3);
        CHECK(max_diff(next, eq) <= 1e-12 * max_abs(eq));

        Config g = c;
        g.scenario = "general";
        g.model.preset = c.scenario;
        const Scenario sg = build_scenario(g);
        const StateField eqg = equilibrium_state(sg);
        const StateField nextg = step_general(eqg, sg, 1e-3);
        CHECK(max_diff(nextg, eqg) <= 1e-12 * max_abs(eqg));
    }
}

TEST_CASE("general stepper without potential matches the torus stepper") {
    Gen gen(41);
    Config c = load("torus_default.yaml");
    c.grid.n_cells = 64;
    for (int trial = 0; trial < 10; ++trial) {
        c.initial.species = {{"cos", gen.uniform(0.5, 2.0), gen.uniform(0.0, 0.4), gen.integer(1, 3)},
                             {"sin", gen.uniform(0.5, 2.0), gen.uniform(0.0, 0.4), gen.integer(1, 3)}};
        c.initial.energy = {"cos", gen.uniform(0.5, 2.0), gen.uniform(0.0, 0.4), gen.integer(1, 3)};
        c.model.kappa = gen.log_uniform(1e-3, 1.0);
        c.model.c = gen.log_uniform(0.1, 10.0);
        const Scenario a = build_scenario(c);
        Config cg = c;
        cg.scenario = "general";
        const Scenario b = build_scenario(cg);
        StateField x = a.initial;
        auto sa = make_stepper(a);
        auto sb = make_stepper(b);
        for (int k = 0; k < 20; ++k) {
            const StateField xa = sa->step(x, 1e-3);
            const StateField xb = sb->step(StateField{b.grid, x.u, x.e}, 1e-3);
            REQUIRE(max_diff(xa, xb) <= 1e-12 * max_abs(xa));
            x = xa;
        }
    }
}

TEST_CASE("torus run: conservation, positivity and monotone entropy") {
    Config c = load("torus_default.yaml");
    c.run.t_end = 2.0;
    c.diagnostics.eep = false;
    const Scenario s = build_scenario(c);
    RunOptions o = run_options(c);
    const RunResult r = run(s, o);
    const auto& series = r.report.series;
    REQUIRE(series.size() > 10);
    const double C0 = series.front().mass_diff, E0 = series.front().energy;
    for (std::size_t k = 0; k < series.size(); ++k) {
        REQUIRE(std::abs(series[k].mass_diff - C0) <= 1e-12 * (1 + std::abs(C0)));
        REQUIRE(std::abs(series[k].energy - E0) <= 1e-12 * E0);
        REQUIRE(series[k].n_min >= 0.0);
        REQUIRE(series[k].p_min >= 0.0);
        REQUIRE(series[k].e_min > 0.0);
        if (k) REQUIRE(series[k].H <= series[k - 1].H + 1e-10 * series.front().H);
    }
    CHECK(r.rejected == 0);
}

TEST_CASE("maximum principle for adversarial step data") {
    SUBCASE("torus") {
        Config c = load("torus_default.yaml");
        c.grid.n_cells = 128;
        c.model.kappa = 0.05;
        c.initial.species = {{"step", 1.0, 0.99, 1}, {"step", 1.0, -0.99, 2}};
        c.initial.energy = {"step", 1.0, 0.9, 3};
        c.run.t_end = 1.0;
        c.run.dt = 1e-3;
        c.run.cadence = 1;
        c.diagnostics.eep = false;
        const Scenario s = build_scenario(c);
        const RunResult r = run(s, run_options(c));
        for (const Record& rec : r.report.series) {
            REQUIRE(rec.e_min >= s.e_lower - 1e-10);
            REQUIRE(rec.e_max <= s.e_upper + 1e-10);
            REQUIRE(rec.n_min >= 0.0);
            REQUIRE(rec.p_min >= 0.0);
        }
    }
    SUBCASE("confined") {
        Config c = load("confined_default.yaml");
        c.grid.n_cells = 128;
        c.initial.species = {{"step", 1.0, 0.99, 1}, {"step", 1.0, -0.99, 2}};
        c.initial.energy = {"step", 1.0, 0.9, 3};
        c.run.t_end = 0.5;
        c.run.cadence = 1;
        c.diagnostics.eep = false;
        const Scenario s = build_scenario(c);
        const RunResult r = run(s, run_options(c));
        for (const Record& rec : r.report.series) {
            REQUIRE(rec.e_ratio_min >= s.e_lower - 1e-10);
            REQUIRE(rec.e_ratio_max <= s.e_upper + 1e-10);
        }
    }
}

TEST_CASE("confined run: e/e* relaxes in the weighted norm and mass is kept") {
    Config c = load("confined_default.yaml");
    c.run.t_end = 0.5;
    c.diagnostics.eep = false;
    const Scenario s = build_scenario(c);
    auto stepper = make_stepper(s);
    StateField x = s.initial;
    const Field& es = s.equilibrium->e_star;
    const double C0 = s.grid->integrate(x.u[0] - x.u[1]);
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 500; ++k) {
        const Field f = x.e.cwiseQuotient(es);
        const double norm = f.cwiseProduct(f).cwiseProduct(es).sum();
        REQUIRE(norm <= prev * (1 + 1e-14));
        prev = norm;
        x = stepper->step(x, 1e-3);
        REQUIRE(std::abs(s.grid->integrate(x.u[0] - x.u[1]) - C0) <= 1e-12 * (1 + std::abs(C0)));
        REQUIRE(std::abs(s.grid->integrate(x.e) - 1.0) <= 1e-12);
    }
}

TEST_CASE("rejected steps are retried and reported") {
    Config c = load("torus_default.yaml");
    c.grid.n_cells = 32;
    c.initial.species = {{"constant", 50.0, 0.0, 1}, {"constant", 50.0, 0.0, 1}};
    c.initial.energy = {"constant", 1.0, 0.0, 1};
    c.run.t_end = 1.0;
    c.run.dt = 1.0;
    c.diagnostics.eep = false;
    const Scenario s = build_scenario(c);
    CHECK_THROWS_AS(step_torus(s.initial, s, 1.0), StepRejected);

    RunOptions o = run_options(c);
    const RunResult r = run(s, o);
    CHECK(r.rejected > 0);
    CHECK(r.final_state.u[0].minCoeff() > 0.0);

    o.max_halvings = 0;
    try {
        run(s, o);
        FAIL("expected a run failure");
    } catch (const RunFailure& e) {
        CHECK(e.t == 0.0);
        CHECK(std::string(e.what()).find("u0 in [50, 50]") != std::string::npos);
    }
}

TEST_CASE("runs are deterministic") {
    Config c = load("confined_default.yaml");
    c.run.t_end = 0.2;
    const Scenario s = build_scenario(c);
    const RunResult a = run(s, run_options(c));
    const RunResult b = run(s, run_options(c));
    REQUIRE(a.report.series.size() == b.report.series.size());
    for (std::size_t k = 0; k < a.report.series.size(); ++k) {
        REQUIRE(a.report.series[k].H == b.report.series[k].H);
        REQUIRE(a.report.series[k].P.P_total == b.report.series[k].P.P_total);
    }
    CHECK(a.report.K_hat == b.report.K_hat);
}
