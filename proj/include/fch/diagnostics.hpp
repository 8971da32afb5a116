#pragma once

#include <iosfwd>
#include <optional>

#include "fch/solver.hpp"

namespace fch {

struct EnergyReport {
    double E = 0.0;
    double fractional_norm_sq = 0.0;
    double potential_integral = 0.0;
    double history_norm_sq = 0.0;
    double C_shift = 0.0;
};

EnergyReport energy(const ProblemSetup& setup, const SimState& state);

/// Pointwise defect of the integrated energy balance, recomputed from the
/// recorded arrays (trapezoid in time). First order in dt for this scheme.
std::vector<double> energy_identity_residual(const TrajectoryRecord& traj);

/// Difference quantities of two runs sharing a configuration. The history
/// difference is replayed exactly from the recorded sources (the histories
/// are affine in their data, so the difference obeys the same transport with
/// the source difference); both runs must start from the same history.
struct PairDiff {
    std::vector<double> times;
    std::vector<double> diff_norm_sq;      // phase-space norm of the difference
    std::vector<double> u_diff_l2_sq;      // lumped interior L2
    std::vector<double> grad_mu_diff_sq;   // H1 seminorm of the potential gap
};

PairDiff analyze_pair(const ProblemSetup& setup, const TrajectoryRecord& a,
                      const TrajectoryRecord& b);

struct ContractionReport {
    std::vector<double> t_grid;
    std::vector<double> diff_norm_sq;
    std::vector<double> bound;         // e^(C t) diff(0)
    double fitted_C_alpha = 0.0;       // envelope constant, bound holds pointwise
    double regression_slope = 0.0;     // least-squares growth rate of log diff^2
    bool violation = false;
    double alpha = 0.0;
};

ContractionReport contraction_check(const ProblemSetup& setup, const TrajectoryRecord& a,
                                    const TrajectoryRecord& b, double alpha);

struct DissipationReport {
    double fitted_kappa1 = 0.0;
    double fitted_C = 0.0;         // plateau of the squared phase norm
    double absorbing_radius = 0.0;
    double fit_residual = 0.0;
    bool plateau_detected = false;
    bool degenerate_fit = false;   // started on the plateau; no decay to fit
};

DissipationReport dissipation_check(const TrajectoryRecord& traj);

/// Precompact-pseudometric value over [0, t_star].
double pseudometric(const ProblemSetup& setup, const TrajectoryRecord& a,
                    const TrajectoryRecord& b, double t_star, double C2alpha);

/// Terminal state of a settled run, Newton-polished; empty when the run is
/// too short, still moving, or the polish fails.
std::optional<SteadyState> omega_limit_probe(const ProblemSetup& setup,
                                             const TrajectoryRecord& traj, double tol);

/// CSV with the documented fixed column order, 17 significant digits.
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& traj);

/// key=value block of fitted constants and run flags.
void write_summary(std::ostream& os, const ProblemSetup& setup, const TrajectoryRecord& traj);

}  // namespace fch
