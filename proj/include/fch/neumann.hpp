#pragma once

#include "fch/fractional.hpp"
#include "fch/mesh.hpp"

namespace fch {

/// Discrete Laplacian with natural (no-flux) boundary behavior, in the lumped
/// inner product. Carries the full spectral decomposition, which is what the
/// negative-order norms, the inverse on mean-zero fields and the history
/// norms are built from. Immutable after construction.
class NeumannOperator {
public:
    NeumannOperator() = default;  // empty; assign from a mesh-built instance
    explicit NeumannOperator(const Mesh& mesh);

    const Mesh& mesh() const { return mesh_; }
    const Mat& stiffness() const { return K_; }
    const Vec& lumped_mass() const { return lm_; }
    const Eigenbasis& eigen() const { return eigen_; }

    /// 1 / (first nonzero eigenvalue); constant of the mean-oscillation bound
    /// |psi - <psi>| <= sqrt(poincare) |grad psi|.
    double poincare() const { return poincare_; }

    double mean(const Vec& v) const;
    double l2_norm_sq(const Vec& v) const;
    double h1_seminorm_sq(const Vec& v) const;

    /// Applies the operator: lumped-mass inverse of the stiffness action.
    Vec apply(const Vec& v) const;

    /// Inverse on the mean-zero range. Rejects inputs whose mean exceeds
    /// 1e-10 times their norm.
    Vec apply_inverse(const Vec& v) const;

    /// Spectral coefficients against the mass-orthonormal eigenvectors.
    Vec coefficients(const Vec& v) const;

    /// Squared negative-order norm: |A^(-r/2)(v - <v>)|^2 + <v>^2.
    double negative_norm_sq(const Vec& v, double r) const;
    double negative_norm(const Vec& v, double r) const;

    /// Inner product of the mean-zero parts in the order -1 norm.
    double h_neg1_inner(const Vec& v, const Vec& w) const;

private:
    Mesh mesh_;
    Mat K_;
    Vec lm_;
    Eigenbasis eigen_;
    Mat coeff_op_;  // eigenvectors^T * diag(lumped mass)
    double poincare_ = 0.0;
};

/// Builds the operator for a mesh (factory mirroring the other modules).
NeumannOperator neumann_operator(const Mesh& mesh);

/// Extends an interior field to all nodes with a zero-gradient trace
/// (boundary value copied from the adjacent interior node).
Vec extend_with_flat_trace(const Mesh& mesh, const Vec& interior);

}  // namespace fch
