#include "fch/mesh.hpp"

#include <cmath>

namespace fch {

Mesh build_interval_mesh(double a, double b, int n_cells) {
    if (!(b > a)) {
        throw Error(ErrorCode::invalid_domain, "mesh: right endpoint must exceed left endpoint");
    }
    if (n_cells < 2) {
        throw Error(ErrorCode::invalid_domain, "mesh: need at least 2 cells");
    }
    Mesh m;
    m.a = a;
    m.b = b;
    m.n_cells = n_cells;
    m.h = (b - a) / n_cells;
    m.nodes.resize(static_cast<std::size_t>(n_cells) + 1);
    for (int i = 0; i <= n_cells; ++i) {
        m.nodes[static_cast<std::size_t>(i)] = a + i * m.h;
    }
    m.nodes.front() = a;
    m.nodes.back() = b;
    return m;
}

QuadratureRule gauss_legendre_rule(int n_points) {
    if (n_points < 1 || n_points > 64) {
        throw Error(ErrorCode::parameter, "quadrature: point count out of range");
    }
    // Newton iteration on Legendre polynomials over [-1,1], then map to [0,1].
    QuadratureRule rule;
    rule.order = 2 * n_points - 1;
    rule.points.resize(static_cast<std::size_t>(n_points));
    rule.weights.resize(static_cast<std::size_t>(n_points));
    const int n = n_points;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (n == 1) p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double pn = (n == 1) ? x : p1;
            pp = n * (x * pn - p0) / (x * x - 1.0);
            double dx = pn / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.points[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
        rule.points[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + x);
        rule.weights[static_cast<std::size_t>(i)] = 0.5 * w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
    }
    return rule;
}

Mat assemble_mass_matrix(const Mesh& mesh) {
    const int n = mesh.n_nodes();
    Mat M = Mat::Zero(n, n);
    const double h = mesh.h;
    for (int k = 0; k < mesh.n_cells; ++k) {
        M(k, k) += h / 3.0;
        M(k + 1, k + 1) += h / 3.0;
        M(k, k + 1) += h / 6.0;
        M(k + 1, k) += h / 6.0;
    }
    return M;
}

Mat interior_mass_matrix(const Mesh& mesh) {
    Mat M = assemble_mass_matrix(mesh);
    const int m = mesh.n_interior();
    return M.block(1, 1, m, m);
}

Vec lumped_mass_vector(const Mesh& mesh) {
    const int n = mesh.n_nodes();
    Vec l = Vec::Constant(n, mesh.h);
    l(0) = mesh.h / 2.0;
    l(n - 1) = mesh.h / 2.0;
    return l;
}

Vec interior_load_vector(const Mesh& mesh) {
    return Vec::Constant(mesh.n_interior(), mesh.h);
}

double interior_mean(const Mesh& mesh, const Vec& u_interior) {
    return mesh.h * u_interior.sum() / mesh.length();
}

double node_mean(const Mesh& mesh, const Vec& v_full) {
    return lumped_mass_vector(mesh).dot(v_full) / mesh.length();
}

Mat assemble_neumann_stiffness(const Mesh& mesh) {
    const int n = mesh.n_nodes();
    Mat K = Mat::Zero(n, n);
    const double ih = 1.0 / mesh.h;
    for (int k = 0; k < mesh.n_cells; ++k) {
        K(k, k) += ih;
        K(k + 1, k + 1) += ih;
        K(k, k + 1) -= ih;
        K(k + 1, k) -= ih;
    }
    return K;
}

Vec extend_by_zero(const Mesh& mesh, const Vec& u_interior) {
    Vec v = Vec::Zero(mesh.n_nodes());
    v.segment(1, mesh.n_interior()) = u_interior;
    return v;
}

Vec restrict_to_interior(const Mesh& mesh, const Vec& v_full) {
    return v_full.segment(1, mesh.n_interior());
}

}  // namespace fch
