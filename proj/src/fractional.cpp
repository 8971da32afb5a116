#include "fch/fractional.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <istream>
#include <ostream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace fch {

namespace {

void check_beta_open01(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw Error(ErrorCode::parameter, "beta must lie in (0, 1)");
    }
}

void check_beta_assembly(double beta) {
    if (!(beta > 0.25 && beta < 1.0)) {
        throw Error(ErrorCode::parameter, "beta must lie in (1/4, 1)");
    }
}

// integral of (1+w)^e over [0,1]
double unit_shift_power_integral(double e) {
    if (std::abs(e + 1.0) < 1e-12) return std::log(2.0);
    return (std::pow(2.0, e + 1.0) - 1.0) / (e + 1.0);
}

// integral of tau^e over [t0, t1], 0 <= t0 < t1
double monomial_integral(double t0, double t1, double e) {
    if (std::abs(e + 1.0) < 1e-12) {
        if (t0 <= 0.0) {
            throw Error(ErrorCode::singular_evaluation,
                        "divergent monomial integral at a boundary node");
        }
        return std::log(t1 / t0);
    }
    if (e < -1.0 && t0 <= 0.0) {
        throw Error(ErrorCode::singular_evaluation,
                    "divergent monomial integral at a boundary node");
    }
    const double p = e + 1.0;
    return (std::pow(t1, p) - (t0 > 0.0 ? std::pow(t0, p) : 0.0)) / p;
}

struct PairKernel {
    double beta;
    double c; // 1 + 2 beta
};

// Closed-form moments T_pq = int_{[0,h]^2} u^p v^q (u+v)^(-1-2b) du dv, p+q=2.
struct AdjacentMoments {
    double t20, t11, t02;
};

AdjacentMoments adjacent_moments_closed(double h, double beta) {
    const double c = 1.0 + 2.0 * beta;
    const double a0 = unit_shift_power_integral(-c);
    const double a1 = unit_shift_power_integral(1.0 - c) - a0;
    const double a2 = unit_shift_power_integral(2.0 - c) - 2.0 * unit_shift_power_integral(1.0 - c) + a0;
    const double scale = std::pow(h, 3.0 - 2.0 * beta) / (3.0 - 2.0 * beta);
    AdjacentMoments m;
    m.t20 = scale * (a2 + a0);
    m.t02 = m.t20;
    m.t11 = scale * (2.0 * a1);
    return m;
}

// Graded 1-D composite Gauss toward t=0 for integrals of f on (0, h] with an
// integrable power singularity at 0.
template <typename F>
double graded_integral_left(F f, double h, const QuadratureRule& rule, int levels) {
    double total = 0.0;
    double right = h;
    for (int j = 0; j < levels; ++j) {
        const double left = right * 0.5;
        const double len = right - left;
        double panel = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            panel += rule.weights[q] * f(left + len * rule.points[q]);
        }
        total += len * panel;
        right = left;
    }
    return total;
}

// Numerical T_pq via dyadic corner shells on [0,h]^2 (independent route).
AdjacentMoments adjacent_moments_graded(double h, double beta) {
    const double c = 1.0 + 2.0 * beta;
    const QuadratureRule g8 = gauss_legendre_rule(8);
    auto cell = [&](double u0, double u1, double v0, double v1, int p, int q) {
        double s = 0.0;
        for (std::size_t i = 0; i < g8.points.size(); ++i) {
            const double u = u0 + (u1 - u0) * g8.points[i];
            for (std::size_t j = 0; j < g8.points.size(); ++j) {
                const double v = v0 + (v1 - v0) * g8.points[j];
                s += g8.weights[i] * g8.weights[j] * std::pow(u, p) * std::pow(v, q) *
                     std::pow(u + v, -c);
            }
        }
        return s * (u1 - u0) * (v1 - v0);
    };
    auto moment = [&](int p, int q) {
        double total = 0.0;
        double outer = h;
        for (int j = 0; j < 52; ++j) {
            const double inner = outer * 0.5;
            // L-shaped shell: [inner,outer]x[0,outer], [0,inner]x[inner,outer]
            total += cell(inner, outer, 0.0, outer, p, q);
            total += cell(0.0, inner, inner, outer, p, q);
            outer = inner;
        }
        return total;
    };
    AdjacentMoments m;
    m.t20 = moment(2, 0);
    m.t02 = moment(0, 2);
    m.t11 = moment(1, 1);
    return m;
}

// int_{e x e} |x-y|^(1-2b) dx dy over one element of length h.
double identical_moment_closed(double h, double beta) {
    return 2.0 * std::pow(h, 3.0 - 2.0 * beta) /
           ((2.0 - 2.0 * beta) * (3.0 - 2.0 * beta));
}

double identical_moment_graded(double h, double beta) {
    // reduce to 2 int_0^h (h-t) t^(1-2b) dt and grade toward t=0
    const QuadratureRule g8 = gauss_legendre_rule(8);
    auto f = [&](double t) { return (h - t) * std::pow(t, 1.0 - 2.0 * beta); };
    return 2.0 * graded_integral_left(f, h, g8, 52);
}

struct LocalScatter {
    // adds "weight * local" into S over the given global node column/row set
    static void scatter(Mat& S, const Mesh& mesh, const std::vector<int>& nodes,
                        const Mat& local, double weight) {
        const int n_last = mesh.n_nodes() - 1;
        for (std::size_t a = 0; a < nodes.size(); ++a) {
            const int ga = nodes[a];
            if (ga <= 0 || ga >= n_last) continue;
            for (std::size_t b = 0; b < nodes.size(); ++b) {
                const int gb = nodes[b];
                if (gb <= 0 || gb >= n_last) continue;
                S(ga - 1, gb - 1) += weight * local(static_cast<Eigen::Index>(a),
                                                    static_cast<Eigen::Index>(b));
            }
        }
    }
};

Mat separated_pair_local(const Mesh& mesh, int k, int l, double beta,
                         const QuadratureRule& quad, int subdiv) {
    // x in element k, y in element l, l >= k+2; nodes [k-1, k, l-1, l]
    const double h = mesh.h;
    const double xe = mesh.node(k - 1);
    const double yf = mesh.node(l - 1);
    const double c = 1.0 + 2.0 * beta;
    Mat local = Mat::Zero(4, 4);
    const double sub = 1.0 / subdiv;
    for (int sx = 0; sx < subdiv; ++sx) {
        for (int sy = 0; sy < subdiv; ++sy) {
            for (std::size_t qi = 0; qi < quad.points.size(); ++qi) {
                const double xi = (sx + quad.points[qi]) * sub;
                const double x = xe + h * xi;
                for (std::size_t qj = 0; qj < quad.points.size(); ++qj) {
                    const double yj = (sy + quad.points[qj]) * sub;
                    const double y = yf + h * yj;
                    const double w =
                        quad.weights[qi] * quad.weights[qj] * sub * sub * h * h *
                        std::pow(y - x, -c);
                    // difference values of the four hats at (x, y)
                    const double d0 = 1.0 - xi;  // node k-1 at x
                    const double d1 = xi;        // node k at x
                    const double d2 = -(1.0 - yj);  // node l-1 at y
                    const double d3 = -yj;          // node l at y
                    const double d[4] = {d0, d1, d2, d3};
                    for (int a = 0; a < 4; ++a)
                        for (int b = 0; b < 4; ++b) local(a, b) += w * d[a] * d[b];
                }
            }
        }
    }
    return local;
}

}  // namespace

double c_constant(int space_dim, double beta) {
    if (space_dim < 1 || space_dim > 3) {
        throw Error(ErrorCode::parameter, "space dimension must be 1, 2 or 3");
    }
    check_beta_open01(beta);
    const double num = beta * std::pow(2.0, 2.0 * beta) *
                       std::tgamma((space_dim + 2.0 * beta) / 2.0);
    const double den = std::pow(M_PI, space_dim / 2.0) * std::tgamma(1.0 - beta);
    return num / den;
}

double exterior_potential_at(double a, double b, double beta, double x) {
    check_beta_open01(beta);
    if (!(x > a && x < b)) {
        throw Error(ErrorCode::singular_evaluation,
                    "exterior potential is only defined strictly inside the interval");
    }
    const double c = c_constant(1, beta);
    return c / (2.0 * beta) *
           (std::pow(x - a, -2.0 * beta) + std::pow(b - x, -2.0 * beta));
}

Vec exterior_potential(const Mesh& mesh, double beta) {
    Vec v(mesh.n_interior());
    for (int k = 0; k < mesh.n_interior(); ++k) {
        v(k) = exterior_potential_at(mesh.a, mesh.b, beta, mesh.node(mesh.interior_node(k)));
    }
    return v;
}

Mat assemble_regional_form(const Mesh& mesh, double beta, const QuadratureRule& quad,
                           AssemblyRoute route) {
    check_beta_assembly(beta);
    const int m = mesh.n_interior();
    const double h = mesh.h;
    const double cnb = c_constant(1, beta);
    Mat S = Mat::Zero(m, m);

    // identical pairs: difference of any hat on one element is slope*(x-y)
    const double j0 = (route == AssemblyRoute::primary)
                          ? identical_moment_closed(h, beta)
                          : identical_moment_graded(h, beta);
    {
        Mat local(2, 2);
        const double s = 1.0 / (h * h);
        local << s * j0, -s * j0, -s * j0, s * j0;
        for (int k = 1; k <= mesh.n_cells; ++k) {
            LocalScatter::scatter(S, mesh, {k - 1, k}, local, 1.0);
        }
    }

    // adjacent pairs: closed-form (or graded) moments of u^p v^q (u+v)^(-1-2b)
    {
        const AdjacentMoments mo = (route == AssemblyRoute::primary)
                                       ? adjacent_moments_closed(h, beta)
                                       : adjacent_moments_graded(h, beta);
        const double s = 1.0 / (h * h);
        Mat local(3, 3);
        // nodes [k-1, k, k+1]; d = [u, v-u, -v] / h
        local(0, 0) = s * mo.t20;
        local(0, 1) = s * (mo.t11 - mo.t20);
        local(0, 2) = -s * mo.t11;
        local(1, 1) = s * (mo.t20 - 2.0 * mo.t11 + mo.t02);
        local(1, 2) = s * (mo.t11 - mo.t02);
        local(2, 2) = s * mo.t02;
        local(1, 0) = local(0, 1);
        local(2, 0) = local(0, 2);
        local(2, 1) = local(1, 2);
        for (int k = 1; k < mesh.n_cells; ++k) {
            LocalScatter::scatter(S, mesh, {k - 1, k, k + 1}, local, 2.0);
        }
    }

    // separated pairs
    const int subdiv = (route == AssemblyRoute::primary) ? 1 : 2;
    const QuadratureRule& rule =
        (route == AssemblyRoute::primary) ? quad : gauss_legendre_rule(16);
    for (int k = 1; k <= mesh.n_cells; ++k) {
        for (int l = k + 2; l <= mesh.n_cells; ++l) {
            const Mat local = separated_pair_local(mesh, k, l, beta, rule, subdiv);
            LocalScatter::scatter(S, mesh, {k - 1, k, l - 1, l}, local, 2.0);
        }
    }

    S *= cnb / 2.0;
    // symmetrize away roundoff
    S = 0.5 * (S + S.transpose()).eval();
    return S;
}

Mat assemble_v_weights(const Mesh& mesh, double beta, AssemblyRoute route) {
    check_beta_assembly(beta);
    const int m = mesh.n_interior();
    const double h = mesh.h;
    const double coef = c_constant(1, beta) / (2.0 * beta);
    Mat V = Mat::Zero(m, m);
    const int n_last = mesh.n_nodes() - 1;

    // Left-singularity contribution in tau = (x-a)/h over [k-1, k]; the right
    // singularity is handled by mirroring the element index.
    auto accumulate_side = [&](bool left_side) {
        for (int k = 1; k <= mesh.n_cells; ++k) {
            // local hats in tau: psi_L = k - tau, psi_R = tau - (k-1)
            const double cL[2] = {static_cast<double>(k), -1.0};
            const double cR[2] = {-(static_cast<double>(k) - 1.0), 1.0};
            int gl = k - 1, gr = k;
            if (!left_side) {
                // mirrored element: global nodes swap roles
                gl = mesh.n_cells - (k - 1);
                gr = mesh.n_cells - k;
            }
            const int gnodes[2] = {gl, gr};
            const double* coeffs[2] = {cL, cR};
            for (int a = 0; a < 2; ++a) {
                if (gnodes[a] <= 0 || gnodes[a] >= n_last) continue;
                for (int b = a; b < 2; ++b) {
                    if (gnodes[b] <= 0 || gnodes[b] >= n_last) continue;
                    // quadratic coefficients of psi_a * psi_b in tau
                    double c2[3] = {coeffs[a][0] * coeffs[b][0],
                                    coeffs[a][0] * coeffs[b][1] + coeffs[a][1] * coeffs[b][0],
                                    coeffs[a][1] * coeffs[b][1]};
                    double val = 0.0;
                    if (route == AssemblyRoute::primary) {
                        for (int mm = 0; mm < 3; ++mm) {
                            if (c2[mm] == 0.0) continue;
                            val += c2[mm] * monomial_integral(k - 1.0, k, mm - 2.0 * beta);
                        }
                    } else {
                        const QuadratureRule g12 = gauss_legendre_rule(12);
                        auto f = [&](double tau) {
                            return (c2[0] + tau * (c2[1] + tau * c2[2])) *
                                   std::pow(tau, -2.0 * beta);
                        };
                        if (k == 1) {
                            val = graded_integral_left(f, 1.0, g12, 52);
                        } else {
                            double s = 0.0;
                            for (std::size_t q = 0; q < g12.points.size(); ++q) {
                                s += g12.weights[q] * f(k - 1.0 + g12.points[q]);
                            }
                            val = s;
                        }
                    }
                    val *= std::pow(h, 1.0 - 2.0 * beta);  // dx = h dtau, powers of h
                    const int ia = gnodes[a] - 1, ib = gnodes[b] - 1;
                    V(ia, ib) += coef * val;
                    if (ia != ib) V(ib, ia) += coef * val;
                }
            }
        }
    };
    accumulate_side(true);
    accumulate_side(false);
    return V;
}

Mat assemble_restricted_form(const Mesh& mesh, double beta, const QuadratureRule& quad,
                             AssemblyRoute route) {
    return assemble_regional_form(mesh, beta, quad, route) +
           assemble_v_weights(mesh, beta, route);
}

Eigenbasis eigenpairs(const Mat& S, const Mat& M, int k) {
    if (S.rows() != S.cols() || M.rows() != M.cols() || S.rows() != M.rows()) {
        throw Error(ErrorCode::parameter, "eigenpairs: dimension mismatch");
    }
    if (k < 1 || k > S.rows()) {
        throw Error(ErrorCode::parameter, "eigenpairs: invalid pair count");
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> solver(S, M);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::numerical_failure,
                    "eigenpairs: generalized eigensolver failed to converge");
    }
    Eigenbasis basis;
    basis.count = k;
    basis.values = solver.eigenvalues().head(k);
    basis.vectors = solver.eigenvectors().leftCols(k);
    return basis;
}

double declared_assembly_tolerance(const QuadratureRule& quad) {
    // Separated pairs are analytic up to the nearest singularity one element
    // away; Gauss error decays like rho^(-2g) with rho about 5.8. Touching
    // pairs use closed forms. Floor at accumulated roundoff.
    const double g = (quad.order + 1.0) / 2.0;
    return std::max(1e-13, 100.0 * std::pow(5.8, -2.0 * g));
}

FractionalOperatorSet build_fractional_operator_set(const Mesh& mesh, double beta,
                                                    const QuadratureRule& quad,
                                                    int n_eigen,
                                                    double requested_tolerance) {
    const double declared = declared_assembly_tolerance(quad);
    if (declared > requested_tolerance) {
        std::ostringstream oss;
        oss << "assembly: quadrature of order " << quad.order << " declares tolerance "
            << declared << " above the requested " << requested_tolerance;
        throw Error(ErrorCode::assembly_tolerance, oss.str());
    }
    FractionalOperatorSet ops;
    ops.beta = beta;
    ops.c_const = c_constant(1, beta);
    ops.S_regional = assemble_regional_form(mesh, beta, quad);
    ops.V_weights = assemble_v_weights(mesh, beta);
    ops.S_restricted = ops.S_regional + ops.V_weights;
    ops.declared_tolerance = declared;
    const Mat M = interior_mass_matrix(mesh);
    ops.eigen = eigenpairs(ops.S_restricted, M, std::min<int>(n_eigen, M.rows()));
    return ops;
}

void dump_matrix_coordinate(std::ostream& os, const Mat& m) {
    os << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            os << i << " " << j << " " << m(i, j) << "\n";
        }
    }
}

Mat read_matrix_coordinate(std::istream& is) {
    std::vector<std::tuple<int, int, double>> entries;
    int maxr = -1, maxc = -1;
    int r, c;
    double v;
    while (is >> r >> c >> v) {
        entries.emplace_back(r, c, v);
        maxr = std::max(maxr, r);
        maxc = std::max(maxc, c);
    }
    if (maxr < 0) throw Error(ErrorCode::io, "coordinate matrix: no entries");
    Mat m = Mat::Zero(maxr + 1, maxc + 1);
    for (auto& [i, j, x] : entries) m(i, j) = x;
    return m;
}

}  // namespace fch
