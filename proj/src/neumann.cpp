#include "fch/neumann.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace fch {

NeumannOperator::NeumannOperator(const Mesh& mesh) : mesh_(mesh) {
    K_ = assemble_neumann_stiffness(mesh);
    lm_ = lumped_mass_vector(mesh);
    const int n = mesh.n_nodes();

    // Standard symmetric reduction of K w = lambda diag(lm) w.
    const Vec d_half = lm_.cwiseSqrt();
    const Vec d_half_inv = d_half.cwiseInverse();
    Mat B = d_half_inv.asDiagonal() * K_ * d_half_inv.asDiagonal();
    B = 0.5 * (B + B.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> solver(B);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorCode::numerical_failure, "neumann: eigensolver failed");
    }
    eigen_.count = n;
    eigen_.values = solver.eigenvalues();
    eigen_.vectors = d_half_inv.asDiagonal() * solver.eigenvectors();

    // The kernel is exactly the constants; pin the first pair.
    eigen_.values(0) = 0.0;
    eigen_.vectors.col(0) = Vec::Constant(n, 1.0 / std::sqrt(mesh.length()));

    coeff_op_ = eigen_.vectors.transpose() * lm_.asDiagonal();
    poincare_ = 1.0 / eigen_.values(1);
}

double NeumannOperator::mean(const Vec& v) const {
    return lm_.dot(v) / mesh_.length();
}

double NeumannOperator::l2_norm_sq(const Vec& v) const {
    return v.dot(lm_.cwiseProduct(v));
}

double NeumannOperator::h1_seminorm_sq(const Vec& v) const {
    return v.dot(K_ * v);
}

Vec NeumannOperator::apply(const Vec& v) const {
    return (K_ * v).cwiseQuotient(lm_);
}

Vec NeumannOperator::apply_inverse(const Vec& v) const {
    const double m = mean(v);
    const double nrm = std::sqrt(l2_norm_sq(v));
    if (std::abs(m) > 1e-10 * std::max(nrm, 1e-300)) {
        throw Error(ErrorCode::mean_zero_violation,
                    "apply_inverse requires a mean-zero field");
    }
    const Vec c = coefficients(v);
    Vec out = Vec::Zero(v.size());
    for (int k = 1; k < eigen_.count; ++k) {
        out += (c(k) / eigen_.values(k)) * eigen_.vectors.col(k);
    }
    return out;
}

Vec NeumannOperator::coefficients(const Vec& v) const { return coeff_op_ * v; }

double NeumannOperator::negative_norm_sq(const Vec& v, double r) const {
    const Vec c = coefficients(v);
    double s = 0.0;
    for (int k = 1; k < eigen_.count; ++k) {
        s += std::pow(eigen_.values(k), -r) * c(k) * c(k);
    }
    const double m = mean(v);
    return s + m * m;
}

double NeumannOperator::negative_norm(const Vec& v, double r) const {
    return std::sqrt(negative_norm_sq(v, r));
}

double NeumannOperator::h_neg1_inner(const Vec& v, const Vec& w) const {
    const Vec cv = coefficients(v);
    const Vec cw = coefficients(w);
    double s = 0.0;
    for (int k = 1; k < eigen_.count; ++k) {
        s += cv(k) * cw(k) / eigen_.values(k);
    }
    return s;
}

NeumannOperator neumann_operator(const Mesh& mesh) { return NeumannOperator(mesh); }

Vec extend_with_flat_trace(const Mesh& mesh, const Vec& interior) {
    const int n = mesh.n_nodes();
    Vec full(n);
    full.segment(1, mesh.n_interior()) = interior;
    full(0) = interior(0);
    full(n - 1) = interior(interior.size() - 1);
    return full;
}

}  // namespace fch
