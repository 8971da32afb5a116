#pragma once

#include <optional>
#include <string>

#include "fch/history.hpp"
#include "fch/memory_kernel.hpp"
#include "fch/neumann.hpp"
#include "fch/potential.hpp"

namespace fch {

enum class GalerkinMode { fem, eigen_modes };
enum class HistoryMode { grid, prony };

struct SolverConfig {
    double alpha = 0.1;             // viscosity, strictly positive
    double beta = 0.5;              // fractional order in (1/4, 1)
    double mean_bound_M = 1.0;      // admissible bound on |<u>|
    double dt = 1e-3;
    double t_end = 1.0;
    GalerkinMode galerkin_mode = GalerkinMode::fem;
    int n_modes = 16;               // spectral mode only
    double stabilization = 4.0;     // >= concavity bound of the potential
    HistoryMode history_mode = HistoryMode::prony;
    double s_max = 40.0;            // grid history truncation
    int n_s = 256;
    double truncation_tol = 1e-8;
    int quad_points = 10;           // separated-pair Gauss points
    bool store_states = true;

    int n_steps() const;
};

/// Everything fixed over a run: the mesh, both operators, the potential with
/// its energy shift, the kernel in both representations, and the spectral
/// bases when running in mode space.
struct ProblemSetup {
    Mesh mesh;
    SolverConfig cfg;
    PotentialSpec pot;
    KernelSpec kernel;
    FractionalOperatorSet ops;
    NeumannOperator an;
    std::optional<SGrid> sgrid;   // grid history mode
    std::optional<PronySet> prony;
    double c_shift = 1.0;         // additive energy constant, 2 C2 |Omega| + 1
    Mat mode_projector_u;         // spectral mode: M-orthogonal projector
    Mat mode_projector_mu;

    ProblemSetup(const ProblemSetup&) = delete;
    ProblemSetup& operator=(const ProblemSetup&) = delete;
    ProblemSetup(ProblemSetup&&) = default;
    ProblemSetup& operator=(ProblemSetup&&) = default;
    ProblemSetup() = default;
};

ProblemSetup build_problem(const Mesh& mesh, const SolverConfig& cfg,
                           const PotentialSpec& pot, const KernelSpec& kernel);

struct SimState {
    double t = 0.0;
    Vec u;                // interior nodes
    Vec mu;               // all nodes
    Vec u_dot;            // rate implied by the current history
    HistoryState history;
};

/// State assembly: computes the consistent rate and chemical potential for
/// given order parameter and history.
SimState make_state(const ProblemSetup& setup, const Vec& u0, HistoryState history);
SimState make_state_zero_history(const ProblemSetup& setup, const Vec& u0);

/// History of a state held fixed for all past time: eta0(s) = s A(mu0) with
/// mu0 the zero-rate chemical potential of u0. Exact in both representations.
HistoryState static_past_history(const ProblemSetup& setup, const Vec& u0);
SimState make_state_static_past(const ProblemSetup& setup, const Vec& u0);

/// One step of the splitting scheme: explicit memory-driven update of u,
/// algebraic chemical-potential solve with stabilized nonlinearity, exact
/// history advance with the new source frozen.
SimState step(const SimState& state, const ProblemSetup& setup);

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<double> energy;
    std::vector<double> mass;
    std::vector<double> u_dot_norm_sq;       // lumped L2, interior
    std::vector<double> history_norm_sq;     // nu weight
    std::vector<double> history_diss_sq;     // -nu' weight
    std::vector<double> dissipation_integral;  // cumulative trapezoid
    std::vector<double> energy_residual;
    std::vector<double> phase_norm_sq;       // u^T S u + history norm

    bool stability_flag = false;
    int first_breach_step = -1;
    bool early_stop = false;
    double max_abs_u = 0.0;
    double max_phase_norm_sq = 0.0;

    // state storage for offline diagnostics
    bool has_states = false;
    std::vector<Vec> u_states;
    std::vector<Vec> mu_states;
    std::vector<Vec> g_states;  // g_states[n] drove the step arriving at times[n]
    Vec terminal_u;
    Vec terminal_u_dot;

    // run fingerprint for comparability checks
    double dt = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    int n_cells = 0;
    double c_shift = 0.0;
    HistoryMode history_mode = HistoryMode::prony;
    double s_max = 0.0;
    int n_s = 0;
    KernelSpec kernel;

    std::size_t size() const { return times.size(); }
};

/// Runs until t_end, recording diagnostics each step. Energy increases above
/// 1e-9 set the stability flag; a blow-up guard stops the run early with the
/// flag set instead of failing. Mass-conservation violations throw.
TrajectoryRecord run(const ProblemSetup& setup, const SimState& initial);

struct SteadyState {
    Vec u;
    double mu_star = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

/// Mean-constrained Newton solve of the stationarity system.
SteadyState steady_state(const ProblemSetup& setup, double mean, const Vec& guess);

/// Lumped quadrature of F over Omega for the zero-extended interior field.
double potential_integral(const ProblemSetup& setup, const Vec& u);
/// Total energy: u^T S u + 2 int F + history norm + shift constant.
double energy_total(const ProblemSetup& setup, const SimState& state);
/// Phase-space norm square: u^T S u + history norm square.
double phase_norm_sq(const ProblemSetup& setup, const SimState& state);
/// Lumped interior L2 norm square (h times the squared euclidean norm).
double interior_l2_norm_sq(const Mesh& mesh, const Vec& v);

/// Max-norm stationarity residual in chemical-potential units.
double stationary_residual(const ProblemSetup& setup, const Vec& u, double mu_star);

/// Deterministic noise initial condition with exact mean.
Vec initial_constant_noise(const ProblemSetup& setup, double mean, double amplitude,
                           std::uint64_t seed);
/// Noise filtered onto the leading operator eigenmodes; smooth, exact mean,
/// normalized so the largest nodal value equals the amplitude.
Vec initial_smooth_noise(const ProblemSetup& setup, double mean, double amplitude,
                         std::uint64_t seed, int n_modes);
/// Steady state for the given mean plus a mean-zero eigenmode perturbation.
Vec initial_equilibrium_perturbation(const ProblemSetup& setup, double mean,
                                     double amplitude, int mode_index);

}  // namespace fch
