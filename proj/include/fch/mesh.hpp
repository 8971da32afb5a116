#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fch/error.hpp"

namespace fch {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Uniform 1-D interval mesh with piecewise-linear (P1) nodal elements.
/// Nodes are x_i = a + i*h for i = 0..n_cells; node 0 and node n_cells sit on
/// the boundary, the rest are interior. Immutable after construction.
struct Mesh {
    double a = 0.0;
    double b = 1.0;
    int n_cells = 0;
    double h = 0.0;
    std::vector<double> nodes;

    int n_nodes() const { return n_cells + 1; }
    int n_interior() const { return n_cells - 1; }
    double length() const { return b - a; }

    double node(int i) const { return nodes[static_cast<std::size_t>(i)]; }
    /// Global node index of interior unknown k (k = 0..n_interior()-1).
    int interior_node(int k) const { return k + 1; }
};

/// Reference-cell quadrature on [0,1]; weights sum to 1. `order` is the
/// highest polynomial degree integrated exactly.
struct QuadratureRule {
    int order = 0;
    std::vector<double> points;
    std::vector<double> weights;
};

Mesh build_interval_mesh(double a, double b, int n_cells);

/// Gauss-Legendre rule with n points mapped to [0,1] (order 2n-1).
QuadratureRule gauss_legendre_rule(int n_points);

/// Consistent P1 mass matrix over all nodes; tridiagonal, SPD, 1^T M 1 = |Omega|.
Mat assemble_mass_matrix(const Mesh& mesh);

/// Principal submatrix of the consistent mass matrix on interior nodes.
Mat interior_mass_matrix(const Mesh& mesh);

/// Row sums of the consistent mass matrix: integral of each nodal hat.
/// Equals the diagonal of the lumped mass matrix.
Vec lumped_mass_vector(const Mesh& mesh);

/// Hat-function integrals restricted to interior nodes (all equal to h on a
/// uniform mesh). Used as the load of the constant and for spatial means.
Vec interior_load_vector(const Mesh& mesh);

/// Mean over Omega of the zero-extension of an interior nodal field.
double interior_mean(const Mesh& mesh, const Vec& u_interior);

/// Mean over Omega of a full-node field (lumped quadrature).
double node_mean(const Mesh& mesh, const Vec& v_full);

/// P1 Neumann stiffness matrix on all nodes (no boundary condition imposed);
/// symmetric positive semidefinite with constants in its kernel.
Mat assemble_neumann_stiffness(const Mesh& mesh);

/// Zero-extension of an interior field to all nodes.
Vec extend_by_zero(const Mesh& mesh, const Vec& u_interior);

/// Restriction of a full-node field to interior nodes.
Vec restrict_to_interior(const Mesh& mesh, const Vec& v_full);

}  // namespace fch
