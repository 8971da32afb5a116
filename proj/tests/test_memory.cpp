#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "fch/memory_kernel.hpp"
#include "test_util.hpp"

using namespace fch;

namespace {

KernelSpec tabulate(const std::function<double(double)>& nu, double s_max, int n) {
    std::vector<double> s(static_cast<std::size_t>(n) + 1), v(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        s[static_cast<std::size_t>(i)] = s_max * i / n;
        v[static_cast<std::size_t>(i)] = nu(s[static_cast<std::size_t>(i)]);
    }
    return make_tabulated_kernel(std::move(s), std::move(v));
}

}  // namespace

TEST_CASE("single exponential kernel satisfies all assumptions") {
    const KernelSpec k = make_exponential_kernel({{1.0, 2.0}});  // nu = 2 e^(-2s)
    const KernelReport rep = validate_kernel(k, 20.0, 2000);
    CHECK(rep.k0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rep.nu0 == doctest::Approx(2.0));
    CHECK(rep.k1);
    CHECK(rep.k2);
    CHECK(rep.k3);
    CHECK(rep.k4);
    CHECK(rep.k5);
    CHECK(rep.lambda_K5 == doctest::Approx(2.0));  // equality case
}

TEST_CASE("oscillating tabulated kernels and the monotonicity assumption") {
    // amplitude 0.9 makes the slope change sign; finite differences over
    // [0, 10] catch it
    const KernelSpec wiggly =
        tabulate([](double s) { return std::exp(-s) * (1.0 + 0.9 * std::sin(s)); }, 20.0, 4000);
    const KernelReport rep = validate_kernel(wiggly, 10.0, 2000);
    CHECK(rep.k1);
    CHECK_FALSE(rep.k2);

    // amplitude 0.5 keeps nu strictly decreasing: 0.5 (cos - sin) never
    // reaches 1, so the derivative stays negative
    const KernelSpec mild =
        tabulate([](double s) { return std::exp(-s) * (1.0 + 0.5 * std::sin(s)); }, 20.0, 4000);
    const KernelReport rep_mild = validate_kernel(mild, 10.0, 2000);
    CHECK(rep_mild.k2);
    CHECK_FALSE(rep_mild.k3);  // mass 1.25, not normalized
    CHECK(rep_mild.k0 == doctest::Approx(1.25).epsilon(1e-4));
}

TEST_CASE("gaussian kernel fails the exponential-domination assumption") {
    const KernelSpec gauss =
        tabulate([](double s) { return 2.0 / std::sqrt(M_PI) * std::exp(-s * s); }, 12.0, 6000);
    const KernelReport rep = validate_kernel(gauss, 10.0, 2000);
    CHECK(rep.k0 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.k1);
    CHECK(rep.k2);
    CHECK(rep.k4);
    CHECK_FALSE(rep.k5);  // nu'(0) = 0 with nu(0) > 0 defeats every lambda

    // pointwise oracle at s = 0 for the candidate rates
    for (double lambda : {0.1, 1.0, 10.0}) {
        const double nu0 = 2.0 / std::sqrt(M_PI);
        CHECK(0.0 + lambda * nu0 > 1e-12);  // nu'(0) = 0
    }
}

TEST_CASE("kernel construction contracts") {
    CHECK_THROWS_AS(make_exponential_kernel({}), Error);
    CHECK_THROWS_AS(make_exponential_kernel({{-1.0, 1.0}}), Error);
    CHECK_THROWS_AS(make_exponential_kernel({{1.0, -2.0}}), Error);
    CHECK_THROWS_AS(make_exponential_kernel({{0.7, 1.0}}), Error);  // mass != 1
    CHECK_THROWS_AS(make_tabulated_kernel({0.0}, {1.0}), Error);
    CHECK_THROWS_AS(make_tabulated_kernel({0.5, 1.0}, {1.0, 0.5}), Error);  // must start at 0
    CHECK_THROWS_AS(make_tabulated_kernel({0.0, 0.0}, {1.0, 0.5}), Error);

    // negative table entries are accepted and reported as a K1 failure
    const KernelSpec neg = make_tabulated_kernel({0.0, 1.0, 2.0}, {1.0, -0.2, 0.0});
    const KernelReport rep = validate_kernel(neg, 2.0, 200);
    CHECK_FALSE(rep.k1);
}

TEST_CASE("s-grid weights integrate the kernel exactly up to the tail") {
    const KernelSpec k = make_exponential_kernel({{1.0, 1.0}});
    const SGrid g = build_s_grid(k, 40.0, 400);
    CHECK(g.nodes.front() == 0.0);
    CHECK(g.nodes.size() == 401);
    double wsum = 0.0;
    for (double w : g.weights) {
        CHECK(w >= 0.0);
        wsum += w;
    }
    CHECK(std::abs(wsum - 1.0) < 1e-10);  // tail e^(-40) is far below
    CHECK(g.tail_mass == doctest::Approx(std::exp(-40.0)).epsilon(1e-10));

    // first moment through the weights: s is linear, so the hat quadrature
    // reproduces the closed form exactly up to the tail
    double first = 0.0;
    for (std::size_t q = 0; q < g.weights.size(); ++q) first += g.weights[q] * g.nodes[q];
    CHECK(first == doctest::Approx(k.first_moment()).epsilon(1e-10));
}

TEST_CASE("truncation guard suggests a longer grid") {
    const KernelSpec k = make_exponential_kernel({{1.0, 1.0}});
    CHECK_THROWS_AS(build_s_grid(k, 1.0, 64), Error);  // tail e^(-1) = 0.37
    try {
        build_s_grid(k, 1.0, 64);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::truncation);
        CHECK(std::string(e.what()).find("increase s_max") != std::string::npos);
    }
    CHECK_THROWS_AS(build_s_grid(k, 40.0, 4), Error);
    CHECK_THROWS_AS(build_s_grid(k, -1.0, 64), Error);
}

TEST_CASE("relaxation family: unit mass, first moment epsilon") {
    for (double eps : {0.2, 0.1, 0.05}) {
        const KernelSpec k = make_relaxation_kernel(eps);
        CHECK(k.mass() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(k.first_moment() == doctest::Approx(eps).epsilon(1e-14));
        CHECK(validate_kernel(k, 40.0 * eps, 500).all_pass());
    }
}

TEST_CASE("prony reduction") {
    const KernelSpec one = make_exponential_kernel({{1.0, 2.0}});
    const PronySet p1 = prony_reduce(one);
    REQUIRE(p1.terms.size() == 1);
    CHECK(p1.terms[0].c == 1.0);
    CHECK(p1.terms[0].lambda == 2.0);

    const KernelSpec two = make_exponential_kernel({{0.5, 1.0}, {0.5, 3.0}});
    const PronySet p2 = prony_reduce(two);
    REQUIRE(p2.terms.size() == 2);
    CHECK(p2.terms[0].c + p2.terms[1].c == doctest::Approx(1.0));

    const KernelSpec gauss =
        tabulate([](double s) { return 2.0 / std::sqrt(M_PI) * std::exp(-s * s); }, 12.0, 600);
    CHECK_THROWS_AS(prony_reduce(gauss), Error);
    try {
        prony_reduce(gauss);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::unsupported_reduction);
    }
}

TEST_CASE("exponential cell moments against adaptive quadrature") {
    for (double lambda : {0.3, 1.0, 20.0}) {
        for (double ds : {1e-4, 0.1, 2.0}) {
            for (int m : {0, 1, 2}) {
                const double s0 = 0.7;
                const double num = oracle::adaptive_simpson(
                    [&](double sig) {
                        return std::pow(sig, m) * lambda * std::exp(-lambda * (s0 + sig));
                    },
                    0.0, ds, 1e-16);
                const double val = exp_cell_moment(lambda, s0, ds, m);
                CHECK(val == doctest::Approx(num).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("tabulated kernels load from two-column files") {
    const std::string path = "test_kernel_tmp.txt";
    {
        std::ofstream os(path);
        os << "0.0 1.0\n0.5 0.60653\n1.0 0.36788\n2.0 0.13534\n";
    }
    const KernelSpec k = load_tabulated_kernel(path);
    CHECK(k.kind == KernelKind::tabulated);
    CHECK(k.eval(0.0) == doctest::Approx(1.0));
    CHECK(k.eval(0.25) == doctest::Approx(0.5 * (1.0 + 0.60653)).epsilon(1e-12));
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_tabulated_kernel("no_such_file.txt"), Error);
}
