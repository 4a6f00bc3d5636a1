#include "erds/config.hpp"
#include "erds/entropy.hpp"
#include "erds/equilibrium.hpp"
#include "erds/errors.hpp"

#include "generators.hpp"

#include <doctest.h>

using namespace erds;
using erds::testing::Gen;
using erds::testing::rel_err;

namespace {

double total_entropy(const EntropyModel& m, const Grid& g, const std::vector<Field>& u, const Field& e) {
    double s = 0.0;
    Eigen::VectorXd ui(static_cast<Eigen::Index>(u.size()));
    for (std::size_t c = 0; c < g.size(); ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        for (std::size_t i = 0; i < u.size(); ++i) ui[static_cast<Eigen::Index>(i)] = u[i][ci];
        s += entropy_density(m, g.center(c), ui, e[ci]);
    }
    return s * g.cell_volume();
}

Field at(const Field& f, std::size_t n) {
    return f.size() == 1 ? Field::Constant(static_cast<Eigen::Index>(n), f[0]) : f;
}

}  // namespace

TEST_CASE("torus equilibrium closed forms") {
    const EquilibriumState eq = solve_torus_equilibrium(1.5, 1.0, 1.0);
    CHECK(std::abs(eq.C_n - 2.0) <= 1e-14);
    CHECK(std::abs(eq.C_p - 0.5) <= 1e-14);
    CHECK(std::abs(eq.Sigma_e - 1.75) <= 1e-14);
    CHECK(std::abs(eq.u_star[0][0] - 2.0) <= 1e-14);
    CHECK(std::abs(eq.u_star[1][0] - 0.5) <= 1e-14);

    const EquilibriumState eq4 = solve_torus_equilibrium(1.5, 4.0, 0.0);
    CHECK(eq4.e_star[0] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(eq4.C_n == doctest::Approx(1.4430004681646914).epsilon(1e-14));
    CHECK(eq4.u_star[0][0] == doctest::Approx(2.0 * 1.4430004681646914).epsilon(1e-14));
    CHECK(eq4.C_n * eq4.C_p == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("torus equilibrium: large and cancelling C0") {
    for (double C0 : {-1e8, -3.0, -1e-9, 0.0, 1e-9, 3.0, 1e8}) {
        const EquilibriumState eq = solve_torus_equilibrium(C0, 2.0, 1.0);
        REQUIRE(eq.C_n > 0.0);
        REQUIRE(eq.C_p > 0.0);
        REQUIRE(rel_err(eq.C_n * eq.C_p, 1.0) <= 1e-14);
        REQUIRE(std::abs((eq.C_n - eq.C_p) * std::sqrt(2.0) - C0) <= 1e-14 * std::max(1.0, std::abs(C0)));
        REQUIRE(eq.Sigma_e > 0.0);
    }
    CHECK_THROWS_AS(solve_torus_equilibrium(1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("confined equilibrium is the normalized Gaussian") {
    const auto grid = Grid::box(1, 256, 6.0);
    const auto V = harmonic_potential(1.0, 0.25 * std::log(M_PI));
    const double C0 = 0.9;
    const EquilibriumState eq = confined_equilibrium(grid, V, C0, 1.0);
    const Field gauss = grid->sample_with([](const Point& x) { return std::exp(-x[0] * x[0]) / std::sqrt(M_PI); });
    CHECK((eq.e_star - gauss).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(grid->integrate(eq.u_star[0] - eq.u_star[1]) - C0) <= 1e-12);
    CHECK(rel_err(eq.C_n * eq.C_p, 1.0) <= 1e-14);
    CHECK(eq.Sigma_e == doctest::Approx((eq.C_n + eq.C_p + 1.0) / 2.0));
}

TEST_CASE("confined equilibrium rejects a box that cuts the Gaussian tail") {
    const auto grid = Grid::box(1, 64, 1.0);
    CHECK_THROWS(confined_equilibrium(grid, harmonic_potential(1.0, 0.0), 0.0, 1.0));
}

TEST_CASE("maximum entropy solver reproduces the closed forms") {
    for (const char* name : {"torus_default.yaml", "confined_default.yaml"}) {
        CAPTURE(name);
        const Scenario s = build_scenario(load_config(std::string(ERDS_CONFIG_DIR) + "/" + name));
        const Grid& g = *s.grid;
        Eigen::VectorXd mass(2);
        mass << g.integrate(s.initial.u[0]), g.integrate(s.initial.u[1]);
        const EquilibriumState eq =
            general_max_entropy(s.model, s.network, s.network.projection() * mass, g.integrate(s.initial.e), s.grid);
        CHECK(eq.iterations <= 20);
        CHECK(std::abs(eq.C_n - s.equilibrium->C_n) <= 1e-10 * s.equilibrium->C_n);
        CHECK(std::abs(eq.C_p - s.equilibrium->C_p) <= 1e-10 * s.equilibrium->C_p);
        const Field e1 = at(eq.e_star, g.size()), e2 = at(s.equilibrium->e_star, g.size());
        CHECK((e1 - e2).cwiseAbs().maxCoeff() <= 1e-10 * e2.cwiseAbs().maxCoeff());
        for (std::size_t i = 0; i < 2; ++i) {
            const Field a = at(eq.u_star[i], g.size()), b = at(s.equilibrium->u_star[i], g.size());
            CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10 * b.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("maximum entropy for one species without reactions") {
    EntropyModel m;
    m.b = {0.5};
    m.C = {1.0};
    m.sigma = 0.5;
    m.c = 1.0;
    const ReactionNetwork net(1, {});
    const auto grid = Grid::torus(1, 16);
    Eigen::VectorXd mass(1);
    mass << 3.0;
    const EquilibriumState eq = general_max_entropy(m, net, mass, 2.0, grid);
    const Field e = at(eq.e_star, grid->size());
    const Field u = at(eq.u_star[0], grid->size());
    CHECK((e.array() - 2.0).abs().maxCoeff() <= 1e-12);
    CHECK((u.array() - 3.0).abs().maxCoeff() <= 1e-12);
    CHECK(eq.ctilde[0] == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(eq.iterations <= 20);
}

TEST_CASE("maximum entropy state: maximality and detailed balance") {
    Gen g(31);
    const Scenario s = build_scenario(load_config(std::string(ERDS_CONFIG_DIR) + "/confined_default.yaml"));
    const Grid& grid = *s.grid;
    Eigen::VectorXd mass(2);
    mass << grid.integrate(s.initial.u[0]), grid.integrate(s.initial.u[1]);
    const EquilibriumState eq =
        general_max_entropy(s.model, s.network, s.network.projection() * mass, grid.integrate(s.initial.e), s.grid);
    std::vector<Field> us{at(eq.u_star[0], grid.size()), at(eq.u_star[1], grid.size())};
    const Field es = at(eq.e_star, grid.size());

    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t c = 0; c < grid.size(); ++c) {
            const auto ci = static_cast<Eigen::Index>(c);
            const double w = eq.ctilde[i] * s.model.weight(i, grid.center(c), es[ci]);
            REQUIRE(std::abs(us[i][ci] / w - 1.0) <= 1e-10);
        }
    }
    CHECK(eq.Sigma_e > 0.0);

    const double S_star = total_entropy(s.model, grid, us, es);
    for (int trial = 0; trial < 100; ++trial) {
        const double amp = g.log_uniform(1e-4, 0.3);
        // common mode of n and p lies in the stoichiometric direction; the difference keeps its integral
        const Field common = (g.smooth_field(grid, 1.0, 2.0).array() - 1.0).matrix() * amp;
        Field diff = (g.smooth_field(grid, 1.0, 2.0).array() - 1.0).matrix() * amp;
        diff.array() -= grid.integrate(diff) / grid.measure();
        Field de = (g.smooth_field(grid, 1.0, 2.0).array() - 1.0).matrix() * amp;
        de.array() -= grid.integrate(de.cwiseProduct(es)) / grid.integrate(es);
        std::vector<Field> u{us[0] + us[0].cwiseProduct(common) + 0.5 * diff.cwiseProduct(es),
                             us[1] + us[1].cwiseProduct(common) - 0.5 * diff.cwiseProduct(es)};
        // the weighted difference is mean-zero only after re-centring
        const double drift = grid.integrate(u[0] - u[1]) - grid.integrate(us[0] - us[1]);
        u[0].array() -= 0.5 * drift * es.array();
        u[1].array() += 0.5 * drift * es.array();
        const Field e = es + de.cwiseProduct(es);
        if (u[0].minCoeff() <= 0.0 || u[1].minCoeff() <= 0.0 || e.minCoeff() <= 0.0) continue;
        REQUIRE(std::abs(grid.integrate(e) - grid.integrate(es)) <= 1e-12);
        REQUIRE(total_entropy(s.model, grid, u, e) <= S_star + 1e-12 * std::max(1.0, std::abs(S_star)));
    }
}
