#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "fch/mesh.hpp"
#include "test_util.hpp"

using namespace fch;

TEST_CASE("interval mesh construction") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 4);
    CHECK(m.n_nodes() == 5);
    CHECK(m.h == doctest::Approx(0.25).epsilon(1e-15));
    const double expected[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int i = 0; i < 5; ++i) CHECK(m.node(i) == doctest::Approx(expected[i]).epsilon(1e-14));

    const Mesh m2 = build_interval_mesh(-1.0, 1.0, 2);
    CHECK(m2.node(0) == -1.0);
    CHECK(m2.node(1) == doctest::Approx(0.0));
    CHECK(m2.node(2) == 1.0);
    CHECK(m2.h == doctest::Approx(1.0));

    CHECK(m.nodes.front() == 0.0);
    CHECK(m.nodes.back() == 1.0);
    for (int i = 0; i < m.n_cells; ++i) {
        CHECK(std::abs(m.node(i + 1) - m.node(i) - m.h) <= 1e-14 * m.length());
    }
}

TEST_CASE("degenerate domains are rejected") {
    CHECK_THROWS_AS(build_interval_mesh(0.0, 0.0, 4), Error);
    CHECK_THROWS_AS(build_interval_mesh(1.0, 0.0, 4), Error);
    CHECK_THROWS_AS(build_interval_mesh(0.0, 1.0, 1), Error);
    try {
        build_interval_mesh(0.0, 0.0, 4);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_domain);
    }
}

TEST_CASE("mass matrix partition of unity and symmetry") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 2);
    const Mat M = assemble_mass_matrix(m);
    CHECK(Vec::Ones(3).dot(M * Vec::Ones(3)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);

    const Mesh m4 = build_interval_mesh(0.0, 1.0, 4);
    const Mat M4 = assemble_mass_matrix(m4);
    // row sums equal the measure of each basis support
    for (int i = 0; i < m4.n_nodes(); ++i) {
        const double support = (i == 0 || i == m4.n_nodes() - 1) ? m4.h / 2.0 : m4.h;
        CHECK(M4.row(i).sum() == doctest::Approx(support).epsilon(1e-14));
    }
}

TEST_CASE("mass matrix is positive definite (dense eigensolve oracle)") {
    const Mesh m = build_interval_mesh(0.0, 1.0, 4);
    const Mat M = assemble_mass_matrix(m);
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("mass matrix entries scale linearly in h") {
    const Mat coarse = assemble_mass_matrix(build_interval_mesh(0.0, 1.0, 4));
    const Mat fine = assemble_mass_matrix(build_interval_mesh(0.0, 1.0, 8));
    CHECK(coarse(1, 1) == doctest::Approx(2.0 * fine(1, 1)).epsilon(1e-14));
    CHECK(coarse(1, 2) == doctest::Approx(2.0 * fine(1, 2)).epsilon(1e-14));
}

TEST_CASE("gauss rules are exact for monomials up to their order") {
    for (int n : {1, 2, 4, 8, 10}) {
        const QuadratureRule rule = gauss_legendre_rule(n);
        CHECK(rule.order == 2 * n - 1);
        double wsum = 0.0;
        for (double w : rule.weights) {
            CHECK(w > 0.0);
            wsum += w;
        }
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
        for (double x : rule.points) {
            CHECK(x >= 0.0);
            CHECK(x <= 1.0);
        }
        for (int k = 0; k <= rule.order; ++k) {
            double integral = 0.0;
            for (std::size_t q = 0; q < rule.points.size(); ++q) {
                integral += rule.weights[q] * std::pow(rule.points[q], k);
            }
            const double exact = 1.0 / (k + 1.0);
            CHECK(std::abs(integral - exact) < 1e-12 * exact + 1e-15);
        }
    }
}

TEST_CASE("interior mean matches the zero-extension integral") {
    const Mesh m = build_interval_mesh(0.0, 2.0, 8);
    std::uint64_t s = 3;
    Vec u(m.n_interior());
    for (int i = 0; i < u.size(); ++i) u(i) = oracle::uniform(s);
    const Vec ext = extend_by_zero(m, u);
    const Mat M = assemble_mass_matrix(m);
    const double exact = Vec::Ones(m.n_nodes()).dot(M * ext) / m.length();
    CHECK(interior_mean(m, u) == doctest::Approx(exact).epsilon(1e-13));
    CHECK(restrict_to_interior(m, ext).isApprox(u));
}

TEST_CASE("neumann stiffness annihilates constants") {
    const Mesh m = build_interval_mesh(-0.5, 1.5, 16);
    const Mat K = assemble_neumann_stiffness(m);
    CHECK((K * Vec::Ones(m.n_nodes())).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
}
