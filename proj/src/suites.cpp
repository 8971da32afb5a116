#include "fch/suites.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace fch::suites {

namespace {

std::string fmt(double v) {
    std::ostringstream oss;
    oss << std::setprecision(6) << v;
    return oss.str();
}

SolverConfig reference_solver_config(const ReferenceParams& p) {
    SolverConfig cfg;
    cfg.alpha = p.alpha;
    cfg.beta = p.beta;
    cfg.mean_bound_M = 1.0;
    cfg.dt = p.dt;
    cfg.t_end = p.t_end;
    cfg.galerkin_mode = GalerkinMode::fem;
    cfg.n_modes = 16;
    cfg.stabilization = 4.0;
    cfg.history_mode = HistoryMode::prony;
    cfg.store_states = true;
    return cfg;
}

double relative_gap(double x, double y) {
    return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300});
}

}  // namespace

ProblemSetup reference_setup(const ReferenceParams& p) {
    const Mesh mesh = build_interval_mesh(p.a, p.b, p.n_cells);
    const KernelSpec kernel = make_exponential_kernel({{1.0, p.lambda}});
    return build_problem(mesh, reference_solver_config(p), make_double_well(), kernel);
}

SimState reference_initial_state(const ProblemSetup& setup, const ReferenceParams& p) {
    const Vec u0 = initial_smooth_noise(setup, 0.0, p.noise_amplitude, p.seed, p.noise_modes);
    return make_state_static_past(setup, u0);
}

// ---------------------------------------------------------------------------
// criteria 1 and 2: mass conservation and per-step energy decrease on the
// 1e4-step reference run
// ---------------------------------------------------------------------------
namespace {

void criteria_mass_energy(std::vector<CriterionResult>& out) {
    ReferenceParams p;
    const ProblemSetup setup = reference_setup(p);
    const SimState init = reference_initial_state(setup, p);
    const TrajectoryRecord rec = run(setup, init);

    {
        double max_drift = 0.0;
        for (double m : rec.mass) max_drift = std::max(max_drift, std::abs(m - rec.mass.front()));
        CriterionResult r;
        r.id = 1;
        r.name = "mass conservation over 1e4 steps";
        r.pass = rec.size() == static_cast<std::size_t>(setup.cfg.n_steps()) + 1 &&
                 max_drift <= 1e-10;
        r.details = "max |<u> - <u0>| = " + fmt(max_drift);
        out.push_back(r);
    }
    {
        double max_increase = -1e300;
        for (std::size_t i = 1; i < rec.size(); ++i) {
            max_increase = std::max(max_increase, rec.energy[i] - rec.energy[i - 1]);
        }
        const double tail = std::abs(rec.energy.back() -
                                     rec.energy[rec.size() - rec.size() / 10]);
        const bool plateau = tail <= 1e-6 * (1.0 + std::abs(rec.energy.back()));
        CriterionResult r;
        r.id = 2;
        r.name = "per-step energy dissipation and plateau";
        r.pass = max_increase <= 1e-9 && plateau;
        r.details = "max step increase = " + fmt(max_increase) +
                    ", tail drift = " + fmt(tail);
        out.push_back(r);
    }
}

// criterion 3: energy-identity residual decreases with first-order rate
void criterion_residual_order(std::vector<CriterionResult>& out) {
    ReferenceParams p;
    p.t_end = 5.0;
    std::vector<double> max_residual;
    for (double dt : {1.25e-3, 6.25e-4, 3.125e-4}) {
        ReferenceParams q = p;
        q.dt = dt;
        const ProblemSetup setup = reference_setup(q);
        const SimState init = reference_initial_state(setup, q);
        const TrajectoryRecord rec = run(setup, init);
        const std::vector<double> res = energy_identity_residual(rec);
        double mx = 0.0;
        for (double v : res) mx = std::max(mx, std::abs(v));
        max_residual.push_back(mx);
    }
    const double order1 = std::log2(max_residual[0] / max_residual[1]);
    const double order2 = std::log2(max_residual[1] / max_residual[2]);
    CriterionResult r;
    r.id = 3;
    r.name = "energy-identity residual order in dt";
    r.pass = order1 >= 0.8 && order1 <= 1.2 && order2 >= 0.8 && order2 <= 1.2;
    r.details = "residuals = {" + fmt(max_residual[0]) + ", " + fmt(max_residual[1]) +
                ", " + fmt(max_residual[2]) + "}, orders = {" + fmt(order1) + ", " +
                fmt(order2) + "}";
    out.push_back(r);
}

// criterion 4: splitting identity between independently assembled routes
void criterion_splitting(std::vector<CriterionResult>& out) {
    const Mesh mesh = build_interval_mesh(0.0, 1.0, 64);
    const QuadratureRule quad = gauss_legendre_rule(10);
    bool pass = true;
    std::ostringstream details;
    for (double beta : {0.3, 0.5, 0.75}) {
        const Mat primary = assemble_restricted_form(mesh, beta, quad, AssemblyRoute::primary);
        const Mat indep = assemble_regional_form(mesh, beta, quad, AssemblyRoute::independent) +
                          assemble_v_weights(mesh, beta, AssemblyRoute::independent);
        const double rel = (primary - indep).cwiseAbs().maxCoeff() /
                           primary.cwiseAbs().maxCoeff();
        pass = pass && rel < 1e-6;
        details << "beta=" << beta << ": " << fmt(rel) << "  ";
    }
    CriterionResult r;
    r.id = 4;
    r.name = "splitting identity across quadrature routes";
    r.pass = pass;
    r.details = details.str();
    out.push_back(r);
}

// criterion 5: spectral structure and Richardson-consistent lowest eigenvalue
void criterion_spectrum(std::vector<CriterionResult>& out) {
    const double beta = 0.5;
    const QuadratureRule quad = gauss_legendre_rule(10);
    std::vector<double> lambda1;
    bool positive_increasing = true;
    for (int n : {32, 64, 128, 256}) {
        const Mesh mesh = build_interval_mesh(0.0, 1.0, n);
        const Mat S = assemble_restricted_form(mesh, beta, quad);
        const Mat M = interior_mass_matrix(mesh);
        const Eigenbasis eb = eigenpairs(S, M, std::min(6, mesh.n_interior()));
        if (eb.values(0) <= 1e-8) positive_increasing = false;
        for (int k = 1; k < eb.count; ++k) {
            if (eb.values(k) <= eb.values(k - 1)) positive_increasing = false;
        }
        lambda1.push_back(eb.values(0));
    }
    bool monotone = true;
    for (std::size_t i = 1; i < lambda1.size(); ++i) {
        if ((lambda1[i] - lambda1[i - 1]) * (lambda1[1] - lambda1[0]) < 0.0) monotone = false;
    }
    // two overlapping three-level Richardson extrapolations must agree
    auto extrapolate = [](double l0, double l1, double l2) {
        const double ratio = (l1 - l0) / (l2 - l1);
        return l2 + (l2 - l1) / (ratio - 1.0);
    };
    const double ex_a = extrapolate(lambda1[0], lambda1[1], lambda1[2]);
    const double ex_b = extrapolate(lambda1[1], lambda1[2], lambda1[3]);
    const double gap = relative_gap(ex_a, ex_b);
    CriterionResult r;
    r.id = 5;
    r.name = "spectrum positive, increasing, Richardson-consistent";
    r.pass = positive_increasing && monotone && gap < 1e-3;
    r.details = "lambda1 = {" + fmt(lambda1[0]) + ", " + fmt(lambda1[1]) + ", " +
                fmt(lambda1[2]) + ", " + fmt(lambda1[3]) + "}, limits " + fmt(ex_a) +
                " vs " + fmt(ex_b) + " (gap " + fmt(gap) + ")";
    out.push_back(r);
}

// criterion 6: grid and moment histories agree over a 100-step run
void criterion_history_duality(std::vector<CriterionResult>& out) {
    ReferenceParams p;
    p.dt = 2.5e-3;
    p.t_end = 0.25;  // 100 steps

    ReferenceParams pg = p;
    ProblemSetup setup_prony = reference_setup(p);

    SolverConfig cfg_grid = reference_solver_config(pg);
    cfg_grid.history_mode = HistoryMode::grid;
    cfg_grid.s_max = 30.0;
    cfg_grid.n_s = 12000;  // ds = dt exactly
    const Mesh mesh = build_interval_mesh(pg.a, pg.b, pg.n_cells);
    const KernelSpec kernel = make_exponential_kernel({{1.0, pg.lambda}});
    ProblemSetup setup_grid = build_problem(mesh, cfg_grid, make_double_well(), kernel);

    const Vec u0 = initial_smooth_noise(setup_prony, 0.0, p.noise_amplitude, p.seed, p.noise_modes);
    SimState sp = make_state_static_past(setup_prony, u0);
    SimState sg = make_state_static_past(setup_grid, u0);

    double max_mem_gap = 0.0, max_norm_gap = 0.0;
    for (int n = 0; n < 100; ++n) {
        sp = step(sp, setup_prony);
        sg = step(sg, setup_grid);
        const Vec wp = memory_integral(sp.history);
        const Vec wg = memory_integral(sg.history);
        const double scale = std::max(wp.cwiseAbs().maxCoeff(), 1e-30);
        max_mem_gap = std::max(max_mem_gap, (wp - wg).cwiseAbs().maxCoeff() / scale);
        const double np = history_norm_sq(sp.history, setup_prony.an, HistoryWeight::nu);
        const double ng = history_norm_sq(sg.history, setup_grid.an, HistoryWeight::nu);
        max_norm_gap = std::max(max_norm_gap, relative_gap(np, ng));
    }
    CriterionResult r;
    r.id = 6;
    r.name = "grid vs moment history duality";
    r.pass = max_mem_gap < 1e-6 && max_norm_gap < 1e-6;
    r.details = "memory gap = " + fmt(max_mem_gap) + ", norm gap = " + fmt(max_norm_gap);
    out.push_back(r);
}

// criterion 7: Newton steady states are fixed points of the stepper
void criterion_fixed_point(std::vector<CriterionResult>& out) {
    ReferenceParams p;
    const ProblemSetup setup = reference_setup(p);
    Vec guess = initial_equilibrium_perturbation(setup, 0.0, 0.3, 0);
    const SteadyState ss = steady_state(setup, 0.0, guess);
    SimState st = make_state_zero_history(setup, ss.u);
    double max_change = 0.0;
    for (int n = 0; n < 100; ++n) {
        const SimState next = step(st, setup);
        max_change = std::max(max_change, (next.u - st.u).cwiseAbs().maxCoeff());
        st = next;
    }
    CriterionResult r;
    r.id = 7;
    r.name = "steady states are stepper fixed points";
    r.pass = max_change < 1e-10;
    r.details = "Newton residual = " + fmt(ss.residual) +
                ", max per-step change = " + fmt(max_change);
    out.push_back(r);
}

// criterion 8: continuous dependence with alpha-monotone growth constant
void criterion_continuous_dependence(std::vector<CriterionResult>& out) {
    ReferenceParams base;
    base.dt = 2.5e-4;
    base.t_end = 2.0;

    const Mesh mesh = build_interval_mesh(base.a, base.b, base.n_cells);
    const KernelSpec kernel = make_exponential_kernel({{1.0, base.lambda}});

    // perturbation direction: fixed mean-zero smooth mode; all runs share the
    // base state's past so the initial history difference vanishes
    ProblemSetup probe = [&] {
        SolverConfig cfg = reference_solver_config(base);
        return build_problem(mesh, cfg, make_double_well(), kernel);
    }();
    const Vec u_base =
        initial_smooth_noise(probe, 0.0, base.noise_amplitude, base.seed, base.noise_modes);
    Vec dir = probe.ops.eigen.vectors.col(1);
    dir.array() -= dir.mean();
    dir /= std::sqrt(interior_l2_norm_sq(mesh, dir));

    auto run_with = [&](double alpha, const Vec& u0) {
        SolverConfig cfg = reference_solver_config(base);
        cfg.alpha = alpha;
        ProblemSetup setup = build_problem(mesh, cfg, make_double_well(), kernel);
        SimState init = make_state(setup, u0, static_past_history(setup, u_base));
        const TrajectoryRecord rec = run(setup, init);
        return std::make_pair(std::move(setup), rec);
    };

    // linear scaling of the three perturbation magnitudes at fixed alpha
    const double alpha_scaling = 0.5;
    auto [setup_s, rec_base] = run_with(alpha_scaling, u_base);
    std::vector<double> diff_at_1;
    const std::vector<double> mags = {1e-2, 5e-3, 2.5e-3};
    for (double eps : mags) {
        auto [setup_p, rec_p] = run_with(alpha_scaling, (u_base + eps * dir).eval());
        const PairDiff d = analyze_pair(setup_s, rec_base, rec_p);
        const std::size_t i1 = static_cast<std::size_t>(std::llround(1.0 / rec_base.dt));
        diff_at_1.push_back(std::sqrt(d.diff_norm_sq[i1]));
    }
    const double ratio1 = diff_at_1[0] / diff_at_1[1];
    const double ratio2 = diff_at_1[1] / diff_at_1[2];
    const bool linear = std::abs(ratio1 - 2.0) <= 0.1 && std::abs(ratio2 - 2.0) <= 0.1;

    // envelope constant per alpha at fixed perturbation
    std::vector<double> fitted_C;
    bool bounds_ok = true;
    for (double alpha : {0.25, 0.5, 1.0}) {
        auto [setup_a, rec_a] = run_with(alpha, u_base);
        auto [setup_b, rec_b] = run_with(alpha, (u_base + 1e-2 * dir).eval());
        const ContractionReport rep = contraction_check(setup_a, rec_a, rec_b, alpha);
        bounds_ok = bounds_ok && !rep.violation && std::isfinite(rep.fitted_C_alpha);
        fitted_C.push_back(rep.fitted_C_alpha);
    }
    const bool monotone = fitted_C[0] >= fitted_C[1] - 1e-9 && fitted_C[1] >= fitted_C[2] - 1e-9;

    CriterionResult r;
    r.id = 8;
    r.name = "continuous dependence and alpha trend";
    r.pass = linear && bounds_ok && monotone;
    r.details = "scaling ratios = {" + fmt(ratio1) + ", " + fmt(ratio2) + "}, fitted C = {" +
                fmt(fitted_C[0]) + ", " + fmt(fitted_C[1]) + ", " + fmt(fitted_C[2]) + "}";
    out.push_back(r);
}

// criterion 9: absorbing plateaus from two initial radii
void criterion_absorbing(std::vector<CriterionResult>& out) {
    ReferenceParams p;
    p.dt = 5e-4;
    p.t_end = 16.0;
    const ProblemSetup setup = reference_setup(p);

    Vec shape = initial_smooth_noise(setup, 0.0, 1.0, 11, 4);
    const double snorm = std::sqrt(shape.dot(setup.ops.S_restricted * shape));
    shape /= snorm;  // phase norm 1 with empty history

    std::vector<DissipationReport> reports;
    double late_dissipation = 0.0;
    for (double radius : {1.0, 10.0}) {
        const TrajectoryRecord rec = run(setup, make_state_zero_history(setup, (radius * shape).eval()));
        reports.push_back(dissipation_check(rec));
        // integral of alpha |u_t|^2 over the last unit time window
        double integral = 0.0;
        for (std::size_t i = rec.size() - 1; i > 0; --i) {
            if (rec.times.back() - rec.times[i - 1] > 1.0) break;
            integral += 0.5 * (rec.times[i] - rec.times[i - 1]) * setup.cfg.alpha *
                        (rec.u_dot_norm_sq[i] + rec.u_dot_norm_sq[i - 1]);
        }
        late_dissipation = std::max(late_dissipation, integral);
    }
    const double plateau_gap =
        relative_gap(reports[0].absorbing_radius, reports[1].absorbing_radius);
    CriterionResult r;
    r.id = 9;
    r.name = "absorbing plateau agreement and late-time dissipation";
    r.pass = reports[0].plateau_detected && reports[1].plateau_detected &&
             plateau_gap <= 0.10 && late_dissipation < 1e-6;
    r.details = "radii = {" + fmt(reports[0].absorbing_radius) + ", " +
                fmt(reports[1].absorbing_radius) + "} (gap " + fmt(plateau_gap) +
                "), late dissipation = " + fmt(late_dissipation);
    out.push_back(r);
}

// criterion 10: the long-run terminal state is a polished equilibrium
void criterion_omega_limit(std::vector<CriterionResult>& out) {
    ReferenceParams p;
    const ProblemSetup setup = reference_setup(p);
    const TrajectoryRecord rec = run(setup, reference_initial_state(setup, p));
    const auto polished = omega_limit_probe(setup, rec, 1e-6);
    CriterionResult r;
    r.id = 10;
    r.name = "terminal state is an equilibrium";
    if (!polished) {
        r.pass = false;
        r.details = "probe returned none (run not settled)";
    } else {
        const double res = stationary_residual(setup, polished->u, polished->mu_star);
        const double dist = std::sqrt(interior_l2_norm_sq(setup.mesh, rec.terminal_u - polished->u));
        r.pass = res < 1e-8 && dist < 1e-5;
        r.details = "stationary residual = " + fmt(res) + ", |u(T) - u*| = " + fmt(dist);
    }
    out.push_back(r);
}

// criterion 11: relaxation family is Cauchy with ratio >= 1.5 per halving
void criterion_relaxation(std::vector<CriterionResult>& out) {
    ReferenceParams p;
    p.t_end = 1.0;
    const Mesh mesh = build_interval_mesh(p.a, p.b, p.n_cells);
    p.dt = 1e-3;
    std::vector<Vec> terminal;
    for (double eps : {0.2, 0.1, 0.05}) {
        SolverConfig cfg = reference_solver_config(p);
        ProblemSetup setup = build_problem(mesh, cfg, make_double_well(),
                                           make_relaxation_kernel(eps));
        const Vec u0 = initial_smooth_noise(setup, 0.0, p.noise_amplitude, 7, 4);
        const TrajectoryRecord rec = run(setup, make_state_static_past(setup, u0));
        terminal.push_back(rec.terminal_u);
    }
    const double d01 = std::sqrt(interior_l2_norm_sq(mesh, terminal[0] - terminal[1]));
    const double d12 = std::sqrt(interior_l2_norm_sq(mesh, terminal[1] - terminal[2]));
    const double d02 = std::sqrt(interior_l2_norm_sq(mesh, terminal[0] - terminal[2]));
    CriterionResult r;
    r.id = 11;
    r.name = "relaxation family Cauchy convergence";
    r.pass = d01 >= 1.5 * d12 && d02 >= d12;
    r.details = "gaps = {" + fmt(d01) + ", " + fmt(d12) + "}, ratio = " + fmt(d01 / d12);
    out.push_back(r);
}

}  // namespace

std::vector<CriterionResult> run_operators_suite() {
    std::vector<CriterionResult> out;
    criterion_splitting(out);
    criterion_spectrum(out);
    return out;
}

std::vector<CriterionResult> run_wellposedness_suite() {
    std::vector<CriterionResult> out;
    criteria_mass_energy(out);
    criterion_residual_order(out);
    criterion_history_duality(out);
    criterion_fixed_point(out);
    return out;
}

std::vector<CriterionResult> run_contraction_suite() {
    std::vector<CriterionResult> out;
    criterion_continuous_dependence(out);
    return out;
}

std::vector<CriterionResult> run_dissipation_suite() {
    std::vector<CriterionResult> out;
    criterion_absorbing(out);
    criterion_omega_limit(out);
    criterion_relaxation(out);
    return out;
}

std::vector<CriterionResult> run_suite_by_name(const std::string& name) {
    if (name == "operators") return run_operators_suite();
    if (name == "wellposedness") return run_wellposedness_suite();
    if (name == "contraction") return run_contraction_suite();
    if (name == "dissipation") return run_dissipation_suite();
    throw Error(ErrorCode::configuration,
                "unknown suite '" + name +
                    "' (expected wellposedness, contraction, dissipation or operators)");
}

std::vector<CriterionResult> run_all_criteria() {
    std::vector<CriterionResult> out;
    for (const char* name : {"wellposedness", "contraction", "dissipation", "operators"}) {
        for (auto& r : run_suite_by_name(name)) out.push_back(std::move(r));
    }
    std::sort(out.begin(), out.end(),
              [](const CriterionResult& x, const CriterionResult& y) { return x.id < y.id; });
    return out;
}

std::string format_result_line(const CriterionResult& r) {
    std::ostringstream oss;
    oss << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << r.id << ": " << r.name
        << " -- " << r.details;
    return oss.str();
}

}  // namespace fch::suites
