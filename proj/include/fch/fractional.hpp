#pragma once

#include <iosfwd>
#include <string>

#include "fch/mesh.hpp"

namespace fch {

/// Normalization constant of the fractional Laplacian,
/// beta * 2^(2 beta) * Gamma((N + 2 beta)/2) / (pi^(N/2) * Gamma(1 - beta)).
double c_constant(int space_dim, double beta);

/// Exterior interaction potential of the interval (a,b) at a point strictly
/// inside it, in closed form. Diverges toward the endpoints.
double exterior_potential_at(double a, double b, double beta, double x);

/// Exterior potential sampled at the interior nodes of the mesh.
Vec exterior_potential(const Mesh& mesh, double beta);

/// Quadrature route selector. `primary` uses closed forms on touching element
/// pairs and tensor Gauss on separated pairs; `independent` uses graded
/// composite panels everywhere. The two agree to roughly 1e-12 relative and
/// cross-validate each other.
enum class AssemblyRoute { primary, independent };

/// Stiffness matrix of the interaction form over Omega x Omega on interior
/// nodes (symmetric positive semidefinite; constants are not in the space,
/// but the form itself vanishes on globally constant extensions).
Mat assemble_regional_form(const Mesh& mesh, double beta, const QuadratureRule& quad,
                           AssemblyRoute route = AssemblyRoute::primary);

/// Mass matrix weighted by the exterior potential, on interior nodes.
Mat assemble_v_weights(const Mesh& mesh, double beta,
                       AssemblyRoute route = AssemblyRoute::primary);

/// Full-space interaction form on interior nodes: regional part plus
/// exterior-potential weights. Strictly positive definite.
Mat assemble_restricted_form(const Mesh& mesh, double beta, const QuadratureRule& quad,
                             AssemblyRoute route = AssemblyRoute::primary);

/// Leading generalized eigenpairs, mass-orthonormal, ascending.
struct Eigenbasis {
    int count = 0;
    Vec values;
    Mat vectors;
};

/// First k eigenpairs of S v = lambda M v with M positive definite.
Eigenbasis eigenpairs(const Mat& S, const Mat& M, int k);

/// Upper bound on the relative entry error of the primary assembly for a
/// given separated-pair Gauss rule.
double declared_assembly_tolerance(const QuadratureRule& quad);

struct FractionalOperatorSet {
    double beta = 0.5;
    double c_const = 0.0;
    Mat S_restricted;
    Mat S_regional;
    Mat V_weights;
    Eigenbasis eigen;
    double declared_tolerance = 0.0;
};

/// Assemble all interior-node operators for one (mesh, beta) pair and the
/// leading eigenbasis of (S_restricted, M). Throws assembly_tolerance if the
/// rule cannot reach `requested_tolerance`.
FractionalOperatorSet build_fractional_operator_set(const Mesh& mesh, double beta,
                                                    const QuadratureRule& quad,
                                                    int n_eigen,
                                                    double requested_tolerance = 1e-8);

/// Plain-text coordinate dump: "row col value" per line, 17 significant digits.
void dump_matrix_coordinate(std::ostream& os, const Mat& m);
Mat read_matrix_coordinate(std::istream& is);

}  // namespace fch
