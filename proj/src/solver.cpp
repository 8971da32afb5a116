#include "fch/solver.hpp"

#include <Eigen/LU>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fch {

namespace {

double splitmix_uniform(std::uint64_t& state) {
    state += 0x9E3779B97f4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * 0x1.0p-53;  // [0, 1)
}

void validate_config(const SolverConfig& cfg, const PotentialSpec& pot) {
    if (!(cfg.alpha > 0.0)) {
        throw Error(ErrorCode::configuration,
                    "alpha must be positive: the inviscid limit is outside the supported range");
    }
    if (!(cfg.beta > 0.25 && cfg.beta < 1.0)) {
        throw Error(ErrorCode::configuration, "beta must lie in (1/4, 1)");
    }
    if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0)) {
        throw Error(ErrorCode::configuration, "dt and t_end must be positive");
    }
    if (cfg.stabilization < pot.c_F) {
        std::ostringstream oss;
        oss << "stabilization " << cfg.stabilization
            << " must dominate the potential's concavity bound " << pot.c_F;
        throw Error(ErrorCode::configuration, oss.str());
    }
    if (cfg.mean_bound_M < 0.0) {
        throw Error(ErrorCode::configuration, "mean bound must be nonnegative");
    }
    if (cfg.galerkin_mode == GalerkinMode::eigen_modes && cfg.n_modes < 2) {
        throw Error(ErrorCode::configuration, "mode-space runs need at least 2 modes");
    }
}

Vec stabilized_fp(const PotentialSpec& pot, double stab, const Vec& u_old, const Vec& u_new) {
    Vec fp(u_old.size());
    for (Eigen::Index i = 0; i < u_old.size(); ++i) {
        fp(i) = potential_eval(pot, u_old(i)).Fp + stab * (u_new(i) - u_old(i));
    }
    return fp;
}

Vec chemical_potential(const ProblemSetup& p, const Vec& u, const Vec& u_dot, const Vec& fp) {
    const double h = p.mesh.h;
    Vec mu_int = p.cfg.alpha * u_dot + (p.ops.S_restricted * u) / h + fp;
    Vec mu = extend_with_flat_trace(p.mesh, mu_int);
    if (p.cfg.galerkin_mode == GalerkinMode::eigen_modes) {
        mu = p.mode_projector_mu * mu;
    }
    return mu;
}

Vec rate_from_history(const ProblemSetup& p, const HistoryState& history) {
    const Vec w = memory_integral(history);
    Vec u_dot = -restrict_to_interior(p.mesh, w);
    if (p.cfg.galerkin_mode == GalerkinMode::eigen_modes) {
        u_dot = p.mode_projector_u * u_dot;
    }
    // exact mean conservation: remove the (roundoff or projection) average
    u_dot.array() -= u_dot.mean();
    return u_dot;
}

}  // namespace

int SolverConfig::n_steps() const {
    const double ratio = t_end / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded)) {
        throw Error(ErrorCode::configuration, "dt must divide t_end");
    }
    return static_cast<int>(rounded);
}

ProblemSetup build_problem(const Mesh& mesh, const SolverConfig& cfg,
                           const PotentialSpec& pot, const KernelSpec& kernel) {
    validate_config(cfg, pot);
    if (std::abs(kernel.mass() - 1.0) > 1e-12) {
        throw Error(ErrorCode::configuration, "kernel must be normalized to unit mass");
    }
    ProblemSetup p;
    p.mesh = mesh;
    p.cfg = cfg;
    p.pot = pot;
    p.kernel = kernel;
    const QuadratureRule quad = gauss_legendre_rule(cfg.quad_points);
    const int n_eigen = std::min(mesh.n_interior(), std::max(cfg.n_modes, 8));
    p.ops = build_fractional_operator_set(mesh, cfg.beta, quad, n_eigen);
    p.an = NeumannOperator(mesh);

    if (cfg.history_mode == HistoryMode::grid) {
        p.sgrid = build_s_grid(kernel, cfg.s_max, cfg.n_s, cfg.truncation_tol);
        const double ratio = cfg.dt / p.sgrid->ds;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) ||
            std::round(ratio) < 1.0) {
            std::ostringstream oss;
            oss << "dt = " << cfg.dt << " is not aligned to the s-grid spacing "
                << p.sgrid->ds << " (s_max / n_s)";
            throw Error(ErrorCode::alignment, oss.str());
        }
    } else {
        p.prony = prony_reduce(kernel);
    }

    const AssumptionReport rep = verify_assumptions(pot, -5.0, 5.0, 10000);
    p.c_shift = rep.n3 ? 2.0 * rep.C2 * mesh.length() + 1.0 : 1.0;

    if (cfg.galerkin_mode == GalerkinMode::eigen_modes) {
        const int nm = std::min(cfg.n_modes, p.ops.eigen.count);
        const Mat V = p.ops.eigen.vectors.leftCols(nm);
        p.mode_projector_u = V * V.transpose() * interior_mass_matrix(mesh);
        const Mat W = p.an.eigen().vectors.leftCols(
            std::min(nm + 1, p.an.eigen().count));
        p.mode_projector_mu = W * W.transpose() * p.an.lumped_mass().asDiagonal();
    }
    return p;
}

double interior_l2_norm_sq(const Mesh& mesh, const Vec& v) {
    return mesh.h * v.squaredNorm();
}

double potential_integral(const ProblemSetup& setup, const Vec& u) {
    const double h = setup.mesh.h;
    double s = potential_eval(setup.pot, 0.0).F;  // two boundary half-cells
    for (Eigen::Index i = 0; i < u.size(); ++i) s += potential_eval(setup.pot, u(i)).F;
    return h * s;
}

double energy_total(const ProblemSetup& setup, const SimState& state) {
    const double frac = state.u.dot(setup.ops.S_restricted * state.u);
    const double pot = potential_integral(setup, state.u);
    const double hist = history_norm_sq(state.history, setup.an, HistoryWeight::nu);
    return frac + 2.0 * pot + hist + setup.c_shift;
}

double phase_norm_sq(const ProblemSetup& setup, const SimState& state) {
    return state.u.dot(setup.ops.S_restricted * state.u) +
           history_norm_sq(state.history, setup.an, HistoryWeight::nu);
}

SimState make_state(const ProblemSetup& setup, const Vec& u0, HistoryState history) {
    if (u0.size() != setup.mesh.n_interior()) {
        throw Error(ErrorCode::configuration, "initial field has the wrong size");
    }
    SimState s;
    s.t = 0.0;
    s.u = u0;
    if (setup.cfg.galerkin_mode == GalerkinMode::eigen_modes) {
        const double mean_before = s.u.mean();
        s.u = setup.mode_projector_u * s.u;
        s.u.array() += mean_before - s.u.mean();
    }
    s.history = std::move(history);
    s.u_dot = rate_from_history(setup, s.history);
    Vec fp(s.u.size());
    for (Eigen::Index i = 0; i < s.u.size(); ++i) fp(i) = potential_eval(setup.pot, s.u(i)).Fp;
    s.mu = chemical_potential(setup, s.u, s.u_dot, fp);
    return s;
}

SimState make_state_zero_history(const ProblemSetup& setup, const Vec& u0) {
    if (setup.cfg.history_mode == HistoryMode::grid) {
        return make_state(setup, u0,
                          make_zero_history_grid(*setup.sgrid, setup.mesh.n_nodes()));
    }
    return make_state(setup, u0,
                      make_zero_history_moments(*setup.prony, setup.mesh.n_nodes()));
}

HistoryState static_past_history(const ProblemSetup& setup, const Vec& u0) {
    Vec fp(u0.size());
    for (Eigen::Index i = 0; i < u0.size(); ++i) fp(i) = potential_eval(setup.pot, u0(i)).Fp;
    const Vec mu0 = chemical_potential(setup, u0, Vec::Zero(u0.size()), fp);
    const Vec g0 = setup.an.apply(mu0);
    if (setup.cfg.history_mode == HistoryMode::grid) {
        HistoryGrid h = make_zero_history_grid(*setup.sgrid, setup.mesh.n_nodes());
        for (int q = 0; q <= h.grid.n_s; ++q) {
            h.values.row(q) = h.grid.nodes[static_cast<std::size_t>(q)] * g0.transpose();
        }
        return h;
    }
    HistoryMoments h = make_zero_history_moments(*setup.prony, setup.mesh.n_nodes());
    const double b = setup.an.h_neg1_inner(g0, g0);
    for (std::size_t i = 0; i < h.terms.size(); ++i) {
        const double lambda = h.prony.terms[i].lambda;
        h.terms[i].m = g0 / lambda;
        h.terms[i].n = 2.0 * b / (lambda * lambda);
    }
    return h;
}

SimState make_state_static_past(const ProblemSetup& setup, const Vec& u0) {
    return make_state(setup, u0, static_past_history(setup, u0));
}

SimState step(const SimState& state, const ProblemSetup& setup) {
    const double dt = setup.cfg.dt;
    SimState out;
    out.t = state.t + dt;
    out.u = state.u + dt * state.u_dot;
    const Vec fp = stabilized_fp(setup.pot, setup.cfg.stabilization, state.u, out.u);
    out.mu = chemical_potential(setup, out.u, state.u_dot, fp);
    const Vec g = setup.an.apply(out.mu);
    out.history = state.history;
    history_step(out.history, g, dt, setup.an);
    out.u_dot = rate_from_history(setup, out.history);
    return out;
}

TrajectoryRecord run(const ProblemSetup& setup, const SimState& initial) {
    const SolverConfig& cfg = setup.cfg;
    const int n_steps = cfg.n_steps();

    if (std::abs(interior_mean(setup.mesh, initial.u)) > cfg.mean_bound_M + 1e-12) {
        throw Error(ErrorCode::configuration,
                    "initial mean exceeds the configured admissible bound");
    }
    if (std::holds_alternative<HistoryGrid>(initial.history)) {
        validate_history(std::get<HistoryGrid>(initial.history), setup.an);
    } else {
        validate_history(std::get<HistoryMoments>(initial.history), setup.an);
    }

    TrajectoryRecord rec;
    rec.dt = cfg.dt;
    rec.alpha = cfg.alpha;
    rec.beta = cfg.beta;
    rec.n_cells = setup.mesh.n_cells;
    rec.c_shift = setup.c_shift;
    rec.history_mode = cfg.history_mode;
    rec.s_max = cfg.s_max;
    rec.n_s = cfg.n_s;
    rec.kernel = setup.kernel;
    rec.has_states = cfg.store_states;

    SimState st = initial;
    double prev_diss = 0.0;

    auto record = [&](const SimState& s) {
        const double E = energy_total(setup, s);
        const double hn = history_norm_sq(s.history, setup.an, HistoryWeight::nu);
        const double hd = history_norm_sq(s.history, setup.an, HistoryWeight::minus_nu_prime);
        const double udn = interior_l2_norm_sq(setup.mesh, s.u_dot);
        const double diss_integrand = 2.0 * cfg.alpha * udn + hd;
        double diss = 0.0;
        if (!rec.times.empty()) {
            diss = rec.dissipation_integral.back() +
                   0.5 * (s.t - rec.times.back()) * (prev_diss + diss_integrand);
        }
        prev_diss = diss_integrand;
        rec.times.push_back(s.t);
        rec.energy.push_back(E);
        rec.mass.push_back(interior_mean(setup.mesh, s.u));
        rec.u_dot_norm_sq.push_back(udn);
        rec.history_norm_sq.push_back(hn);
        rec.history_diss_sq.push_back(hd);
        rec.dissipation_integral.push_back(diss);
        rec.energy_residual.push_back(E + diss - rec.energy.front());
        const double pn = s.u.dot(setup.ops.S_restricted * s.u) + hn;
        rec.phase_norm_sq.push_back(pn);
        rec.max_phase_norm_sq = std::max(rec.max_phase_norm_sq, pn);
        rec.max_abs_u = std::max(rec.max_abs_u, s.u.cwiseAbs().maxCoeff());
        if (rec.has_states) {
            rec.u_states.push_back(s.u);
            rec.mu_states.push_back(s.mu);
            rec.g_states.push_back(rec.times.size() == 1 ? Vec::Zero(s.mu.size()).eval()
                                                         : setup.an.apply(s.mu));
        }
    };

    record(st);
    const double mass0 = rec.mass.front();

    for (int n = 1; n <= n_steps; ++n) {
        st = step(st, setup);
        if (!st.u.allFinite()) {
            rec.early_stop = true;
            rec.stability_flag = true;
            if (rec.first_breach_step < 0) rec.first_breach_step = n;
            break;
        }
        record(st);

        if (std::abs(rec.mass.back() - mass0) > 1e-10 * (1.0 + std::abs(mass0))) {
            std::ostringstream oss;
            oss << "mass conservation violated at step " << n << ": <u> drifted by "
                << rec.mass.back() - mass0;
            throw Error(ErrorCode::invariant_breach, oss.str());
        }
        const double dE = rec.energy.back() - rec.energy[rec.energy.size() - 2];
        if (dE > 1e-9 && !rec.stability_flag) {
            rec.stability_flag = true;
            rec.first_breach_step = n;
        }
        if (dE > 1e-2 * (1.0 + std::abs(rec.energy[rec.energy.size() - 2]))) {
            rec.early_stop = true;
            rec.stability_flag = true;
            if (rec.first_breach_step < 0) rec.first_breach_step = n;
            break;
        }
    }
    rec.terminal_u = st.u;
    rec.terminal_u_dot = st.u_dot;
    return rec;
}

SteadyState steady_state(const ProblemSetup& setup, double mean, const Vec& guess) {
    if (std::abs(mean) > setup.cfg.mean_bound_M + 1e-12) {
        throw Error(ErrorCode::parameter, "steady state: mean exceeds the admissible bound");
    }
    const int m = setup.mesh.n_interior();
    if (guess.size() != m) {
        throw Error(ErrorCode::parameter, "steady state: guess has the wrong size");
    }
    const double h = setup.mesh.h;
    const double omega = setup.mesh.length();
    const Mat& S = setup.ops.S_restricted;

    Vec u = guess;
    double mu_star = 0.0;
    {
        // consistent starting value for the multiplier
        Vec r = (S * u) / h;
        for (int i = 0; i < m; ++i) r(i) += potential_eval(setup.pot, u(i)).Fp;
        mu_star = r.mean();
    }

    std::vector<double> residual_history;
    for (int iter = 0; iter <= 100; ++iter) {
        Vec fp(m), fpp(m);
        for (int i = 0; i < m; ++i) {
            const auto v = potential_eval(setup.pot, u(i));
            fp(i) = v.Fp;
            fpp(i) = v.Fpp;
        }
        Vec r_u = S * u + h * fp - mu_star * h * Vec::Ones(m);
        const double r_c = h * u.sum() - mean * omega;
        const double res = std::max(r_u.cwiseAbs().maxCoeff() / h, std::abs(r_c) / omega);
        residual_history.push_back(res);
        if (res < 1e-13 || (res < 1e-10 && iter >= 3)) {
            SteadyState out;
            out.u = u;
            out.mu_star = mu_star;
            out.residual = res;
            out.iterations = iter;
            return out;
        }
        Mat J = Mat::Zero(m + 1, m + 1);
        J.topLeftCorner(m, m) = S;
        J.topLeftCorner(m, m) += (h * fpp).asDiagonal();
        J.block(0, m, m, 1) = -h * Vec::Ones(m);
        J.block(m, 0, 1, m) = h * Vec::Ones(m).transpose();
        Vec rhs(m + 1);
        rhs.head(m) = -r_u;
        rhs(m) = -r_c;
        const Vec delta = J.partialPivLu().solve(rhs);
        u += delta.head(m);
        mu_star += delta(m);
    }
    std::ostringstream oss;
    oss << "steady state: Newton failed to converge in 100 iterations; residuals:";
    for (std::size_t i = residual_history.size() > 8 ? residual_history.size() - 8 : 0;
         i < residual_history.size(); ++i) {
        oss << " " << residual_history[i];
    }
    throw Error(ErrorCode::numerical_failure, oss.str());
}

double stationary_residual(const ProblemSetup& setup, const Vec& u, double mu_star) {
    const double h = setup.mesh.h;
    Vec r = (setup.ops.S_restricted * u) / h;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        r(i) += potential_eval(setup.pot, u(i)).Fp - mu_star;
    }
    return r.cwiseAbs().maxCoeff();
}

Vec initial_constant_noise(const ProblemSetup& setup, double mean, double amplitude,
                           std::uint64_t seed) {
    const int m = setup.mesh.n_interior();
    std::uint64_t state = seed;
    Vec u(m);
    for (int i = 0; i < m; ++i) {
        u(i) = mean + amplitude * (2.0 * splitmix_uniform(state) - 1.0);
    }
    // make the discrete mean of the zero-extension exactly the requested one
    u.array() += (mean * setup.mesh.length() / setup.mesh.h - u.sum()) / m;
    return u;
}

Vec initial_smooth_noise(const ProblemSetup& setup, double mean, double amplitude,
                         std::uint64_t seed, int n_modes) {
    const int m = setup.mesh.n_interior();
    const int k = std::min(n_modes, setup.ops.eigen.count);
    std::uint64_t state = seed;
    Vec u = Vec::Zero(m);
    for (int j = 0; j < k; ++j) {
        u += (2.0 * splitmix_uniform(state) - 1.0) * setup.ops.eigen.vectors.col(j);
    }
    const double peak = u.cwiseAbs().maxCoeff();
    if (peak > 0.0) u *= amplitude / peak;
    u.array() += (mean * setup.mesh.length() / setup.mesh.h - u.sum()) / m;
    return u;
}

Vec initial_equilibrium_perturbation(const ProblemSetup& setup, double mean,
                                     double amplitude, int mode_index) {
    if (mode_index < 0 || mode_index >= setup.ops.eigen.count) {
        throw Error(ErrorCode::parameter, "perturbation mode index out of range");
    }
    const SteadyState ss =
        steady_state(setup, mean, Vec::Constant(setup.mesh.n_interior(), mean));
    Vec mode = setup.ops.eigen.vectors.col(mode_index);
    mode.array() -= mode.mean();
    return ss.u + amplitude * mode;
}

}  // namespace fch
