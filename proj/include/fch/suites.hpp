#pragma once

#include <string>
#include <vector>

#include "fch/diagnostics.hpp"
#include "fch/solver.hpp"

namespace fch::suites {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string details;
};

/// Pinned desk-scale reference problem used by the long-run criteria. The
/// domain is wide enough that the mean-zero linearization at u = 0 has one
/// unstable direction, so runs separate into a nontrivial equilibrium.
struct ReferenceParams {
    double a = 0.0, b = 2.0;
    int n_cells = 48;
    double beta = 0.5;
    double alpha = 0.1;
    double lambda = 1.0;   // single-exponential kernel rate
    double dt = 2.5e-3;
    double t_end = 25.0;
    double noise_amplitude = 0.2;
    int noise_modes = 4;
    std::uint64_t seed = 42;
};

ProblemSetup reference_setup(const ReferenceParams& params);
SimState reference_initial_state(const ProblemSetup& setup, const ReferenceParams& params);

/// Operator checks: splitting identity and spectral structure (criteria 4, 5).
std::vector<CriterionResult> run_operators_suite();
/// Conservation, energy law, residual order, history duality, fixed points
/// (criteria 1, 2, 3, 6, 7).
std::vector<CriterionResult> run_wellposedness_suite();
/// Continuous dependence (criterion 8).
std::vector<CriterionResult> run_contraction_suite();
/// Absorbing set, terminal equilibria, relaxation family (criteria 9, 10, 11).
std::vector<CriterionResult> run_dissipation_suite();

std::vector<CriterionResult> run_suite_by_name(const std::string& name);
std::vector<CriterionResult> run_all_criteria();

std::string format_result_line(const CriterionResult& r);

}  // namespace fch::suites
