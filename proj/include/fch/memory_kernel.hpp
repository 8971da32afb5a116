#pragma once

#include <string>
#include <vector>

#include "fch/error.hpp"

namespace fch {

enum class KernelKind { exponential_sum, tabulated };

struct KernelTerm {
    double c;       // weight, sums to 1 over all terms
    double lambda;  // decay rate, positive
};

/// Relaxation kernel nu(s). Exponential sums are nu(s) = sum c_i lambda_i
/// exp(-lambda_i s) with total mass sum c_i; tabulated kernels interpolate a
/// monotone-in-s table linearly. Accepted kernels are normalized to unit mass.
struct KernelSpec {
    KernelKind kind = KernelKind::exponential_sum;
    std::vector<KernelTerm> terms;           // exponential_sum
    std::vector<double> table_s;             // tabulated
    std::vector<double> table_nu;
    double lambda_K5 = 0.0;                  // 0 means absent

    double eval(double s) const;
    double eval_derivative(double s) const;  // analytic for sums, slope for tables
    double mass() const;                     // integral of nu over (0, inf)
    double mass_tail(double s_max) const;    // integral over (s_max, inf)
    double first_moment() const;             // integral of s nu(s) ds (sums only)
};

KernelSpec make_exponential_kernel(const std::vector<KernelTerm>& terms);
/// Single-term family with unit mass and first moment epsilon.
KernelSpec make_relaxation_kernel(double epsilon);
KernelSpec make_tabulated_kernel(std::vector<double> s, std::vector<double> nu);
/// Reads a two-column whitespace-separated (s, nu) file with increasing s.
KernelSpec load_tabulated_kernel(const std::string& path);

struct KernelReport {
    bool k1 = false;  // nonnegative, integrable
    bool k2 = false;  // nonincreasing
    bool k3 = false;  // unit mass
    bool k4 = false;  // finite value at 0+
    bool k5 = false;  // nu' + lambda nu <= 0 for the stored lambda
    double k0 = 0.0;
    double nu0 = 0.0;
    double lambda_K5 = 0.0;
    bool all_pass() const { return k1 && k2 && k3 && k4 && k5; }
};

KernelReport validate_kernel(const KernelSpec& spec, double s_max, int samples);

struct PronySet {
    std::vector<KernelTerm> terms;
};

/// Exact reduction for exponential-sum kernels; tabulated kernels are not
/// reducible and raise unsupported_reduction.
PronySet prony_reduce(const KernelSpec& spec);

/// Uniform grid on [0, s_max] carrying, per node, the weight of the linear
/// interpolant against nu: weights[q] = integral of nu(s) hat_q(s) ds. For a
/// field sampled on the nodes, weights^T samples is the exact integral of nu
/// times the piecewise-linear interpolant, so the only defect against the
/// half-line integral is the truncated tail.
struct SGrid {
    double s_max = 0.0;
    int n_s = 0;
    double ds = 0.0;
    std::vector<double> nodes;
    std::vector<double> weights;
    double tail_mass = 0.0;
    KernelSpec kernel;  // the kernel the weights were built against

    // per-cell moments of the weight w against local coordinate sigma in
    // [0, ds]: m0 = int w, m1 = int w sigma, m2 = int w sigma^2. Stored for
    // both w = nu and w = -nu', for exact integration of piecewise-quadratic
    // functions of s (norms of piecewise-linear histories).
    std::vector<double> nu_m0, nu_m1, nu_m2;
    std::vector<double> dnu_m0, dnu_m1, dnu_m2;
};

SGrid build_s_grid(const KernelSpec& spec, double s_max, int n_s,
                   double truncation_tol = 1e-8);

/// Weights of the linear interpolant against an arbitrary exponential term
/// lambda e^(-lambda s) on the same grid (used to take moments of gridded
/// histories).
std::vector<double> exponential_hat_weights(const SGrid& grid, double lambda);

/// int_0^x t^m e^(-t) dt for m in {0,1,2}, stable for small x.
double exp_lower_moment(int m, double x);

/// int_0^ds sigma^m lambda e^(-lambda (s0 + sigma)) dsigma.
double exp_cell_moment(double lambda, double s0, double ds, int m);

}  // namespace fch
