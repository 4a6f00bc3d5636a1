#include "erds/errors.hpp"
#include "erds/reaction_network.hpp"

#include "generators.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace erds;
using erds::testing::Gen;
using erds::testing::rel_err;

TEST_CASE("log mean: closed value and limits") {
    CHECK(lambda_mean(4.0, 1.0) == doctest::Approx(2.1640425613334451).epsilon(1e-15));
    CHECK(lambda_mean(1.0, 4.0) == doctest::Approx(2.1640425613334451).epsilon(1e-15));
    CHECK(lambda_mean(3.0, 3.0) == 3.0);
    // continuity across the series switch
    for (int k : {10, 17, 23, 30}) {
        const double d = std::ldexp(1.0, -k);  // a - 2 exactly representable
        const double a = 2.0 + d;
        const double exact = d / std::log1p(d / 2.0);
        CHECK(rel_err(lambda_mean(a, 2.0), exact) < 1e-9);
    }
    CHECK_THROWS_AS(lambda_mean(-1.0, 1.0), DomainError);
}

TEST_CASE("log mean lies between its arguments") {
    Gen g(11);
    for (int k = 0; k < 100000; ++k) {
        const double a = g.log_uniform(1e-8, 1e8);
        const double b = g.log_uniform(1e-8, 1e8);
        const double L = lambda_mean(a, b);
        REQUIRE(L >= std::min(a, b) * (1 - 1e-15));
        REQUIRE(L <= std::max(a, b) * (1 + 1e-15));
        REQUIRE(L == lambda_mean(b, a));
    }
}

TEST_CASE("reaction rhs of n + p <-> 0") {
    const Reaction r{{1, 1}, {0, 0}, [](const Eigen::VectorXd&, double) { return 1.0; }};
    const ReactionNetwork net(2, {r});
    Eigen::VectorXd u(2), w(2);
    u << 2, 2;
    w << 1, 1;
    const Eigen::VectorXd R = reaction_rhs(net, u, w, net.k_star(u, 1.0));
    CHECK(R[0] == doctest::Approx(-3.0));
    CHECK(R[1] == doctest::Approx(-3.0));
}

TEST_CASE("bipolar mass-action form equals k (e - n p)") {
    Gen g(12);
    RateLaw law;
    for (int k = 0; k < 1000; ++k) {
        law.k = g.log_uniform(1e-2, 1e2);
        const ReactionNetwork net = bipolar_network(law);
        const double n = g.log_uniform(1e-3, 1e3), p = g.log_uniform(1e-3, 1e3), e = g.log_uniform(1e-3, 1e3);
        const double Cn = g.log_uniform(0.1, 10.0);
        Eigen::VectorXd u(2), w(2);
        u << n, p;
        w << Cn * std::sqrt(e), std::sqrt(e) / Cn;
        const Eigen::VectorXd R = reaction_rhs(net, u, w, net.k_star(u, e));
        const double expect = law.k * (e - n * p);
        REQUIRE(std::abs(R[0] - expect) <= 1e-12 * (law.k * (e + n * p)));
        REQUIRE(R[0] == R[1]);
    }
}

TEST_CASE("Onsager matrix of a single reaction") {
    const Reaction r{{1, 1}, {0, 0}, [](const Eigen::VectorXd&, double) { return 1.0; }};
    const ReactionNetwork net(2, {r});
    Eigen::VectorXd u(2), w(2);
    u << 2, 2;
    w << 1, 1;
    const Eigen::MatrixXd H = onsager_matrix(net, u, w, net.k_star(u, 1.0));
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) CHECK(H(i, j) == doctest::Approx(2.1640425613334451).epsilon(1e-14));
    }
}

TEST_CASE("projection onto the conserved directions") {
    const Reaction r{{1, 1}, {0, 0}, [](const Eigen::VectorXd&, double) { return 1.0; }};
    const Eigen::MatrixXd P = stoich_projection({r});
    CHECK(P(0, 0) == doctest::Approx(0.5));
    CHECK(P(0, 1) == doctest::Approx(-0.5));
    CHECK(P(1, 0) == doctest::Approx(-0.5));
    CHECK(P(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("detailed balance of the bipolar reaction") {
    RateLaw law;
    const ReactionNetwork net = bipolar_network(law);
    Eigen::VectorXd w(2);
    w << 2.0, 0.5;
    auto rep = check_detailed_balance(net, w, {1.0}, {1.0});
    CHECK(rep.balanced);
    CHECK(std::abs(rep.log_residuals[0]) < 1e-15);
    w << 2.0, 1.0;
    rep = check_detailed_balance(net, w, {1.0}, {1.0});
    CHECK_FALSE(rep.balanced);
    CHECK(rep.log_residuals[0] == doctest::Approx(0.69314718055994531));
}

TEST_CASE("gradient structure, conservation and positivity on random networks") {
    Gen g(13);
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int I = g.integer(1, 4);
        const ReactionNetwork net = g.network(I, g.integer(1, 3));
        const Eigen::VectorXd u = g.positive(I, 1e-2, 1e2);
        const Eigen::VectorXd w = g.positive(I, 1e-1, 1e1);
        const Eigen::VectorXd ks = net.k_star(u, 1.0);
        const Eigen::MatrixXd H = onsager_matrix(net, u, w, ks);
        const Eigen::VectorXd R = reaction_rhs(net, u, w, ks);
        const Eigen::VectorXd lhs = H * (u.array().log() - w.array().log()).matrix();
        // scale by the magnitude of the individual reaction fluxes
        double scale = 0.0;
        for (std::size_t r = 0; r < net.reactions().size(); ++r) {
            const auto& re = net.reactions()[r];
            double ya = 1.0, yb = 1.0;
            for (int i = 0; i < I; ++i) {
                ya *= std::pow(u[i] / w[i], re.alpha[static_cast<std::size_t>(i)]);
                yb *= std::pow(u[i] / w[i], re.beta[static_cast<std::size_t>(i)]);
            }
            scale = std::max(scale, ks[static_cast<Eigen::Index>(r)] * (ya + yb) * 2.0);
        }
        const double err = (lhs + R).cwiseAbs().maxCoeff() / scale;
        worst = std::max(worst, err);
        REQUIRE(err <= 1e-10);
        REQUIRE((net.projection() * R).cwiseAbs().maxCoeff() <= 1e-12 * scale);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        REQUIRE(es.eigenvalues().minCoeff() >= -1e-12 * H.norm());
    }
    MESSAGE("worst relative residual " << worst);
}
