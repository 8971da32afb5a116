#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fch/solver.hpp"

namespace fch {

/// Process exit codes of the batch front-end.
enum ExitStatus : int {
    exit_ok = 0,
    exit_config_error = 2,
    exit_numerical_failure = 3,
    exit_invariant_breach = 4,
};

/// One run, fully described by a sectioned key=value file. Parsing is strict:
/// unknown sections or keys are errors, and emit/parse round-trips.
struct RunConfig {
    // [mesh]
    double a = 0.0;
    double b = 1.0;
    int n_cells = 32;
    // [operator]
    double beta = 0.5;
    int quad_points = 10;
    // [potential]
    std::string potential_kind = "double_well";
    std::vector<double> coefficients;
    // [kernel]
    std::string kernel_kind = "exponential_sum";
    std::vector<KernelTerm> kernel_terms{{1.0, 1.0}};
    std::string kernel_file;
    // [history]
    std::string history_mode = "prony";
    double s_max = 40.0;
    int n_s = 256;
    double truncation_tol = 1e-8;
    // [solver]
    double alpha = 0.1;
    double dt = 1e-3;
    double t_end = 1.0;
    double stabilization = 4.0;
    double mean_bound = 1.0;
    std::string galerkin_mode = "fem";
    int n_modes = 16;
    // [initial]
    std::string ic_kind = "constant_noise";
    double ic_mean = 0.0;
    double ic_amplitude = 0.05;
    std::uint64_t ic_seed = 42;
    int ic_mode_index = 1;
    std::string ic_file;
    std::string history_file;
    // [output]
    std::string output_dir = "out";
    int checkpoint_every = 0;
    bool store_states = true;
    // [diagnostics]
    bool summary = true;
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);
std::string emit_config(const RunConfig& cfg);

/// Structural validation beyond parsing: parameter ranges and referenced
/// files. Throws Error(configuration) with a message naming the offender.
void validate_run_config(const RunConfig& cfg);

/// Solver-facing views of the config.
SolverConfig solver_config(const RunConfig& cfg);
PotentialSpec potential_from_config(const RunConfig& cfg);
KernelSpec kernel_from_config(const RunConfig& cfg);
ProblemSetup setup_from_config(const RunConfig& cfg);
SimState initial_state_from_config(const RunConfig& cfg, const ProblemSetup& setup);

/// Batch entry points; exceptions are mapped onto ExitStatus.
int run_simulation(const RunConfig& cfg);
int run_suite(const RunConfig& cfg, const std::string& suite_name);

int exit_code_for(const Error& e);

}  // namespace fch
