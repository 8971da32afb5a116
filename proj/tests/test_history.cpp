#include <sstream>

#include "doctest.h"
#include "fch/history.hpp"
#include "test_util.hpp"

using namespace fch;

namespace {

struct Fixture {
    Mesh mesh = build_interval_mesh(0.0, 1.0, 16);
    NeumannOperator an{mesh};
    KernelSpec kernel = make_exponential_kernel({{1.0, 1.0}});
    SGrid grid = build_s_grid(kernel, 24.0, 240, 1e-8);  // ds = 0.1

    Vec cos_mode(int k = 1) const {
        Vec v(mesh.n_nodes());
        for (int i = 0; i < mesh.n_nodes(); ++i) v(i) = std::cos(k * M_PI * mesh.node(i));
        return v;
    }
    Vec mean_zero_noise(std::uint64_t seed) const {
        Vec v(mesh.n_nodes());
        for (int i = 0; i < v.size(); ++i) v(i) = oracle::uniform(seed);
        v(0) = v(1);
        v(mesh.n_nodes() - 1) = v(mesh.n_nodes() - 2);
        v.array() -= an.mean(v);
        return v;
    }
};

}  // namespace

TEST_CASE("history from a quiescent or stationary past") {
    Fixture f;
    // zero past potential: zero history
    const HistoryGrid h0 = init_history_from_past(
        [&](double) { return Vec::Zero(f.mesh.n_nodes()).eval(); }, f.grid, f.an, 1e9);
    CHECK(h0.values.cwiseAbs().maxCoeff() == 0.0);

    // time-independent past potential mu*: eta0(s) = s A(mu*), exactly linear
    const Vec mu_star = f.cos_mode();
    const Vec g = f.an.apply(mu_star);
    const HistoryGrid h1 =
        init_history_from_past([&](double) { return mu_star; }, f.grid, f.an, 1e9);
    for (int q = 0; q <= f.grid.n_s; ++q) {
        const Vec expected = f.grid.nodes[static_cast<std::size_t>(q)] * g;
        CHECK((h1.values.row(q).transpose() - expected).cwiseAbs().maxCoeff() < 1e-13);
    }
    validate_history(h1, f.an);

    // constant-in-space past potential lies in the operator kernel
    const HistoryGrid h2 = init_history_from_past(
        [&](double) { return Vec::Constant(f.mesh.n_nodes(), 3.0).eval(); }, f.grid, f.an, 1e9);
    CHECK(h2.values.cwiseAbs().maxCoeff() < 1e-14);

    // past shorter than the grid
    CHECK_THROWS_AS(
        init_history_from_past([&](double) { return mu_star; }, f.grid, f.an, 1.0), Error);
}

TEST_CASE("transport is an exact characteristic shift") {
    Fixture f;
    const Vec g = f.an.apply(f.cos_mode());

    // source-free: pure right-shift with zeros filling the inflow
    HistoryGrid h = make_zero_history_grid(f.grid, f.mesh.n_nodes());
    for (int q = 0; q <= f.grid.n_s; ++q) {
        h.values.row(q) = f.grid.nodes[static_cast<std::size_t>(q)] * g.transpose();
    }
    HistoryGrid shifted = h;
    transport_step(shifted, Vec::Zero(f.mesh.n_nodes()), 3 * f.grid.ds);
    for (int q = 3; q <= f.grid.n_s; ++q) {
        CHECK((shifted.values.row(q) - h.values.row(q - 3)).cwiseAbs().maxCoeff() < 1e-14);
    }
    CHECK(shifted.values.topRows(4).cwiseAbs().maxCoeff() == 0.0);

    // constant source from a zero start: eta(s) = min(s, t) g
    HistoryGrid hc = make_zero_history_grid(f.grid, f.mesh.n_nodes());
    const double dt = 2 * f.grid.ds;
    for (int step = 1; step <= 5; ++step) {
        transport_step(hc, g, dt);
        const double t = step * dt;
        for (int q = 0; q <= f.grid.n_s; ++q) {
            const double s = f.grid.nodes[static_cast<std::size_t>(q)];
            const Vec expected = std::min(s, t) * g;
            CHECK((hc.values.row(q).transpose() - expected).cwiseAbs().maxCoeff() < 1e-13);
        }
    }

    // semigroup property: one double step equals two single steps
    HistoryGrid a = hc, b = hc;
    transport_step(a, g, 2.0 * dt);
    transport_step(b, g, dt);
    transport_step(b, g, dt);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-14);

    // misaligned step width
    CHECK_THROWS_AS(transport_step(hc, g, 1.5 * f.grid.ds), Error);
    try {
        transport_step(hc, g, 1.5 * f.grid.ds);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::alignment);
    }
}

TEST_CASE("moment update solves the scalar relaxation exactly") {
    Fixture f;
    const PronySet prony = prony_reduce(f.kernel);  // lambda = 1
    const Vec g = f.an.apply(f.cos_mode());

    HistoryMoments m = make_zero_history_moments(prony, f.mesh.n_nodes());
    const double dt = 0.05;
    for (int step = 1; step <= 40; ++step) {
        moment_step(m, g, dt, f.an);
        const double t = step * dt;
        const Vec expected = (1.0 - std::exp(-t)) * g;  // m(t) = (1 - e^-t) g for lambda = 1
        CHECK((m.terms[0].m - expected).cwiseAbs().maxCoeff() < 1e-13);
    }

    // source-free decay
    HistoryMoments d = m;
    for (int step = 1; step <= 10; ++step) {
        moment_step(d, Vec::Zero(f.mesh.n_nodes()), dt, f.an);
    }
    const Vec expected = std::exp(-10.0 * dt) * m.terms[0].m;
    CHECK((d.terms[0].m - expected).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("memory integral") {
    Fixture f;
    // zero history
    const HistoryGrid h0 = make_zero_history_grid(f.grid, f.mesh.n_nodes());
    CHECK(memory_integral(h0).cwiseAbs().maxCoeff() == 0.0);

    // eta(s) = s g against nu = lambda e^(-lambda s) integrates to g / lambda
    for (double lambda : {1.0, 3.0}) {
        const KernelSpec k = make_exponential_kernel({{1.0, lambda}});
        const SGrid grid = build_s_grid(k, 40.0 / lambda, 400, 1e-8);
        HistoryGrid h = make_zero_history_grid(grid, f.mesh.n_nodes());
        const Vec g = f.an.apply(f.cos_mode());
        for (int q = 0; q <= grid.n_s; ++q) {
            h.values.row(q) = grid.nodes[static_cast<std::size_t>(q)] * g.transpose();
        }
        const Vec w = memory_integral(h, k);
        CHECK((w - g / lambda).cwiseAbs().maxCoeff() < 1e-9 * g.cwiseAbs().maxCoeff());
    }

    // kernel mismatch raises a configuration error
    const KernelSpec other = make_exponential_kernel({{1.0, 2.0}});
    CHECK_THROWS_AS(memory_integral(h0, other), Error);
}

TEST_CASE("grid and moment representations agree along a driven run") {
    Fixture f;
    const PronySet prony = prony_reduce(f.kernel);
    HistoryGrid hg = make_zero_history_grid(f.grid, f.mesh.n_nodes());
    HistoryMoments hm = make_zero_history_moments(prony, f.mesh.n_nodes());

    std::uint64_t seed = 123;
    const double dt = f.grid.ds;  // aligned
    for (int step = 1; step <= 100; ++step) {
        const Vec g = f.an.apply(f.mean_zero_noise(seed + step));
        transport_step(hg, g, dt);
        moment_step(hm, g, dt, f.an);

        const Vec wg = memory_integral(hg);
        const Vec wm = memory_integral(hm);
        const double scale = std::max(1e-30, wm.cwiseAbs().maxCoeff());
        CHECK((wg - wm).cwiseAbs().maxCoeff() < 1e-10 * scale);

        const double ng = history_norm_sq(hg, f.an, HistoryWeight::nu);
        const double nm = history_norm_sq(hm, HistoryWeight::nu);
        CHECK(ng == doctest::Approx(nm).epsilon(1e-10));

        const double dg = history_norm_sq(hg, f.an, HistoryWeight::minus_nu_prime);
        const double dm = history_norm_sq(hm, HistoryWeight::minus_nu_prime);
        CHECK(dg == doctest::Approx(dm).epsilon(1e-10));
    }
    validate_history(hg, f.an);
    validate_history(hm, f.an);
}

TEST_CASE("weighted history norms") {
    Fixture f;
    const HistoryGrid h0 = make_zero_history_grid(f.grid, f.mesh.n_nodes());
    CHECK(history_norm(h0, f.an, HistoryWeight::nu) == 0.0);

    // eta(s) = s A(mu*), mu* = cos(pi x), nu = e^-s: squared norm -> pi^2
    const Mesh fine = build_interval_mesh(0.0, 1.0, 128);
    const NeumannOperator an_fine(fine);
    const KernelSpec k = make_exponential_kernel({{1.0, 1.0}});
    const SGrid grid = build_s_grid(k, 40.0, 400, 1e-8);
    Vec mu_star(fine.n_nodes());
    for (int i = 0; i < fine.n_nodes(); ++i) mu_star(i) = std::cos(M_PI * fine.node(i));
    const Vec g = an_fine.apply(mu_star);
    HistoryGrid h = make_zero_history_grid(grid, fine.n_nodes());
    for (int q = 0; q <= grid.n_s; ++q) {
        h.values.row(q) = grid.nodes[static_cast<std::size_t>(q)] * g.transpose();
    }
    CHECK(history_norm_sq(h, an_fine, HistoryWeight::nu) ==
          doctest::Approx(M_PI * M_PI).epsilon(2e-3));

    // homogeneity
    HistoryGrid h2 = h;
    h2.values *= 2.0;
    CHECK(history_norm(h2, an_fine, HistoryWeight::nu) ==
          doctest::Approx(2.0 * history_norm(h, an_fine, HistoryWeight::nu)).epsilon(1e-12));

    // single-exponential identity: the -nu' weight is lambda times the nu weight
    CHECK(history_norm_sq(h, an_fine, HistoryWeight::minus_nu_prime) ==
          doctest::Approx(history_norm_sq(h, an_fine, HistoryWeight::nu)).epsilon(1e-12));
}

TEST_CASE("source-free transport does not increase the history norm") {
    Fixture f;
    std::uint64_t seed = 77;
    HistoryGrid h = make_zero_history_grid(f.grid, f.mesh.n_nodes());
    for (int step = 1; step <= 30; ++step) {
        transport_step(h, f.an.apply(f.mean_zero_noise(seed + step)), f.grid.ds);
    }
    double prev = history_norm_sq(h, f.an, HistoryWeight::nu);
    for (int step = 0; step < 50; ++step) {
        transport_step(h, Vec::Zero(f.mesh.n_nodes()), f.grid.ds);
        const double cur = history_norm_sq(h, f.an, HistoryWeight::nu);
        CHECK(cur <= prev * (1.0 + 1e-13));
        prev = cur;
    }
}

TEST_CASE("mean-zero violations are detected") {
    Fixture f;
    HistoryGrid h = make_zero_history_grid(f.grid, f.mesh.n_nodes());
    h.values.row(5).setConstant(1.0);  // constant row has nonzero mean
    CHECK_THROWS_AS(validate_history(h, f.an), Error);

    HistoryGrid h2 = make_zero_history_grid(f.grid, f.mesh.n_nodes());
    h2.values.row(0).setConstant(1e-3);  // eta(0) must vanish
    CHECK_THROWS_AS(validate_history(h2, f.an), Error);
}

TEST_CASE("checkpoint round-trip") {
    Fixture f;
    HistoryGrid h = make_zero_history_grid(f.grid, f.mesh.n_nodes());
    std::uint64_t seed = 15;
    for (int step = 1; step <= 7; ++step) {
        transport_step(h, f.an.apply(f.mean_zero_noise(seed + step)), f.grid.ds);
    }
    std::stringstream ss;
    save_history_grid(ss, h);
    const HistoryGrid back = load_history_grid(ss);
    CHECK(back.grid.n_s == h.grid.n_s);
    CHECK(back.grid.s_max == doctest::Approx(h.grid.s_max));
    CHECK(back.n_nodes() == h.n_nodes());
    CHECK((back.values - h.values).cwiseAbs().maxCoeff() <
          1e-14 * (1.0 + h.values.cwiseAbs().maxCoeff()));
}
