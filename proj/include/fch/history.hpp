#pragma once

#include <functional>
#include <variant>

#include "fch/memory_kernel.hpp"
#include "fch/mesh.hpp"
#include "fch/neumann.hpp"

namespace fch {

/// Past-history field eta(s) sampled on an s-grid; row q holds eta at
/// s = q * ds over all mesh nodes. Row 0 is identically zero and every row is
/// mean-zero in space. Transport steps are exact characteristic shifts, so dt
/// must be an integer multiple of ds.
struct HistoryGrid {
    SGrid grid;
    Mat values;  // (n_s + 1) x n_nodes

    int n_nodes() const { return static_cast<int>(values.cols()); }
};

/// One exponential term of the reduced history: the moment field
/// m = int lambda e^(-lambda s) eta(s) ds and the norm accumulator
/// n = int lambda e^(-lambda s) |eta(s)|^2_(-1) ds. Both evolve by exact
/// exponential integration when the source is frozen over a step.
struct HistoryMomentTerm {
    Vec m;
    double n = 0.0;
};

struct HistoryMoments {
    PronySet prony;
    std::vector<HistoryMomentTerm> terms;

    int n_nodes() const { return terms.empty() ? 0 : static_cast<int>(terms.front().m.size()); }
};

using HistoryState = std::variant<HistoryGrid, HistoryMoments>;

enum class HistoryWeight { nu, minus_nu_prime };

HistoryGrid make_zero_history_grid(const SGrid& grid, int n_nodes);
HistoryMoments make_zero_history_moments(const PronySet& prony, int n_nodes);

/// Builds eta_0 by cumulative integration of the operator applied to the past
/// chemical potential: eta_0(s) = int_0^s A(mu_past(-y)) dy. `mu_past(y)`
/// must return the field at past time -y for y in [0, available_past];
/// shorter past data raises a truncation error.
HistoryGrid init_history_from_past(const std::function<Vec(double)>& mu_past,
                                   const SGrid& grid, const NeumannOperator& an,
                                   double available_past);

/// Moment representation of a gridded history (exact for the piecewise-linear
/// interpolant up to the truncated tail).
HistoryMoments moments_from_grid(const HistoryGrid& h, const PronySet& prony,
                                 const NeumannOperator& an);

/// Advances eta by dt along characteristics with the source g frozen:
/// eta(s) <- eta(s - dt) + dt g for s > dt, eta(s) <- s g for s <= dt.
void transport_step(HistoryGrid& h, const Vec& g, double dt);

/// Exact exponential update of every moment term for frozen g.
void moment_step(HistoryMoments& h, const Vec& g, double dt, const NeumannOperator& an);

/// Integral of nu(s) eta(s) ds in the representation's own quadrature.
Vec memory_integral(const HistoryGrid& h);
Vec memory_integral(const HistoryMoments& h);
/// Checked variants: the kernel must match the one the history was built for.
Vec memory_integral(const HistoryGrid& h, const KernelSpec& kernel);
Vec memory_integral(const HistoryMoments& h, const KernelSpec& kernel);

/// Weighted squared history norm: int w(s) |eta(s)|^2_(-1) ds with w = nu or
/// w = -nu'. Exact for the piecewise-linear-in-s interpolant.
double history_norm_sq(const HistoryGrid& h, const NeumannOperator& an, HistoryWeight w);
double history_norm_sq(const HistoryMoments& h, HistoryWeight w);
double history_norm(const HistoryGrid& h, const NeumannOperator& an, HistoryWeight w);

double history_norm_sq(const HistoryState& h, const NeumannOperator& an, HistoryWeight w);
Vec memory_integral(const HistoryState& h);
void history_step(HistoryState& h, const Vec& g, double dt, const NeumannOperator& an);
HistoryState history_difference(const HistoryState& a, const HistoryState& b);

/// Throws invariant_breach when a row violates eta(0) = 0 or mean-zero.
void validate_history(const HistoryGrid& h, const NeumannOperator& an, double tol = 1e-10);
void validate_history(const HistoryMoments& h, const NeumannOperator& an, double tol = 1e-10);

/// Plain-text checkpoint: header (n_s, s_max, n_nodes, kernel terms), then
/// row-major values with 17 significant digits.
void save_history_grid(std::ostream& os, const HistoryGrid& h);
HistoryGrid load_history_grid(std::istream& is, double truncation_tol = 1e-8);

}  // namespace fch
