#include "fch/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace fch {

namespace {

void check_comparable(const TrajectoryRecord& a, const TrajectoryRecord& b) {
    const bool same = a.dt == b.dt && a.n_cells == b.n_cells && a.alpha == b.alpha &&
                      a.beta == b.beta && a.size() == b.size() &&
                      a.history_mode == b.history_mode && a.s_max == b.s_max &&
                      a.n_s == b.n_s;
    if (!same) {
        throw Error(ErrorCode::configuration,
                    "trajectory comparison: runs do not share a configuration");
    }
    if (!a.has_states || !b.has_states) {
        throw Error(ErrorCode::configuration,
                    "trajectory comparison: runs must be recorded with state storage");
    }
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_abs_residual = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LineFit f;
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) return f;
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    for (std::size_t i = 0; i < n; ++i) {
        f.max_abs_residual =
            std::max(f.max_abs_residual, std::abs(y[i] - f.slope * x[i] - f.intercept));
    }
    return f;
}

}  // namespace

EnergyReport energy(const ProblemSetup& setup, const SimState& state) {
    EnergyReport rep;
    rep.fractional_norm_sq = state.u.dot(setup.ops.S_restricted * state.u);
    rep.potential_integral = potential_integral(setup, state.u);
    rep.history_norm_sq = history_norm_sq(state.history, setup.an, HistoryWeight::nu);
    rep.C_shift = setup.c_shift;
    rep.E = rep.fractional_norm_sq + 2.0 * rep.potential_integral + rep.history_norm_sq +
            rep.C_shift;
    return rep;
}

std::vector<double> energy_identity_residual(const TrajectoryRecord& traj) {
    std::vector<double> r(traj.size(), 0.0);
    double integral = 0.0;
    auto integrand = [&](std::size_t i) {
        return 2.0 * traj.alpha * traj.u_dot_norm_sq[i] + traj.history_diss_sq[i];
    };
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (i > 0) {
            integral += 0.5 * (traj.times[i] - traj.times[i - 1]) *
                        (integrand(i - 1) + integrand(i));
        }
        r[i] = traj.energy[i] + integral - traj.energy.front();
    }
    return r;
}

PairDiff analyze_pair(const ProblemSetup& setup, const TrajectoryRecord& a,
                      const TrajectoryRecord& b) {
    check_comparable(a, b);
    PairDiff d;
    d.times = a.times;

    HistoryState diff_history =
        (setup.cfg.history_mode == HistoryMode::grid)
            ? HistoryState(make_zero_history_grid(*setup.sgrid, setup.mesh.n_nodes()))
            : HistoryState(make_zero_history_moments(*setup.prony, setup.mesh.n_nodes()));

    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i > 0) {
            const Vec dg = a.g_states[i] - b.g_states[i];
            history_step(diff_history, dg, a.dt, setup.an);
        }
        const Vec du = a.u_states[i] - b.u_states[i];
        const Vec dmu = a.mu_states[i] - b.mu_states[i];
        const double hist = history_norm_sq(diff_history, setup.an, HistoryWeight::nu);
        d.diff_norm_sq.push_back(du.dot(setup.ops.S_restricted * du) + hist);
        d.u_diff_l2_sq.push_back(interior_l2_norm_sq(setup.mesh, du));
        d.grad_mu_diff_sq.push_back(dmu.dot(setup.an.stiffness() * dmu));
    }
    return d;
}

ContractionReport contraction_check(const ProblemSetup& setup, const TrajectoryRecord& a,
                                    const TrajectoryRecord& b, double alpha) {
    const PairDiff d = analyze_pair(setup, a, b);
    ContractionReport rep;
    rep.alpha = alpha;
    rep.t_grid = d.times;
    rep.diff_norm_sq = d.diff_norm_sq;
    const double d0 = d.diff_norm_sq.front();

    if (d0 <= 0.0) {
        // identical initial data: everything stays zero
        rep.bound.assign(d.times.size(), 0.0);
        for (double v : d.diff_norm_sq) {
            if (v > 1e-20) rep.violation = true;
        }
        return rep;
    }

    double envelope = 0.0;
    std::vector<double> ts, logs;
    for (std::size_t i = 1; i < d.times.size(); ++i) {
        const double ratio = std::max(d.diff_norm_sq[i] / d0, 1e-300);
        envelope = std::max(envelope, std::log(ratio) / d.times[i]);
        ts.push_back(d.times[i]);
        logs.push_back(std::log(ratio));
    }
    rep.fitted_C_alpha = envelope;
    rep.regression_slope = fit_line(ts, logs).slope;
    rep.bound.resize(d.times.size());
    for (std::size_t i = 0; i < d.times.size(); ++i) {
        rep.bound[i] = std::exp(rep.fitted_C_alpha * d.times[i]) * d0;
        if (d.diff_norm_sq[i] > rep.bound[i] * (1.0 + 1e-9)) rep.violation = true;
    }
    return rep;
}

DissipationReport dissipation_check(const TrajectoryRecord& traj) {
    DissipationReport rep;
    const std::size_t n = traj.size();
    if (n < 20) {
        rep.degenerate_fit = true;
        return rep;
    }
    const std::size_t tail_begin = n - std::max<std::size_t>(n / 10, 2);
    double plateau = 0.0, lo = traj.phase_norm_sq[tail_begin], hi = lo;
    for (std::size_t i = tail_begin; i < n; ++i) {
        plateau += traj.phase_norm_sq[i];
        lo = std::min(lo, traj.phase_norm_sq[i]);
        hi = std::max(hi, traj.phase_norm_sq[i]);
    }
    plateau /= static_cast<double>(n - tail_begin);
    rep.fitted_C = plateau;
    rep.absorbing_radius = std::sqrt(std::max(plateau, 0.0));
    rep.plateau_detected = (hi - lo) <= 0.05 * (1.0 + std::abs(plateau));

    // decay fit on the portion clearly above the plateau
    const double excess0 = traj.phase_norm_sq.front() - plateau;
    std::vector<double> ts, logs;
    if (excess0 > 1e-10 * (1.0 + plateau)) {
        for (std::size_t i = 0; i < n; ++i) {
            const double e = traj.phase_norm_sq[i] - plateau;
            if (e > 0.05 * excess0) {
                ts.push_back(traj.times[i]);
                logs.push_back(std::log(e));
            }
        }
    }
    if (ts.size() < 5) {
        rep.degenerate_fit = true;
        return rep;
    }
    const LineFit f = fit_line(ts, logs);
    rep.fitted_kappa1 = -f.slope;
    rep.fit_residual = f.max_abs_residual;
    return rep;
}

double pseudometric(const ProblemSetup& setup, const TrajectoryRecord& a,
                    const TrajectoryRecord& b, double t_star, double C2alpha) {
    check_comparable(a, b);
    if (t_star > a.times.back() + 1e-12) {
        throw Error(ErrorCode::parameter, "pseudometric: horizon exceeds the recorded run");
    }
    double integral = 0.0;
    auto value = [&](std::size_t i) {
        const Vec du = a.u_states[i] - b.u_states[i];
        const Vec dmu = a.mu_states[i] - b.mu_states[i];
        return dmu.dot(setup.an.stiffness() * dmu) + interior_l2_norm_sq(setup.mesh, du);
    };
    double prev = value(0);
    for (std::size_t i = 1; i < a.size() && a.times[i] <= t_star + 1e-12; ++i) {
        const double cur = value(i);
        integral += 0.5 * (a.times[i] - a.times[i - 1]) * (prev + cur);
        prev = cur;
    }
    return C2alpha * std::sqrt(std::max(integral, 0.0));
}

std::optional<SteadyState> omega_limit_probe(const ProblemSetup& setup,
                                             const TrajectoryRecord& traj, double tol) {
    const std::size_t n = traj.size();
    if (n < 10) return std::nullopt;
    const std::size_t tail_begin = n - std::max<std::size_t>(n / 10, 2);
    for (std::size_t i = tail_begin; i < n; ++i) {
        if (std::sqrt(traj.u_dot_norm_sq[i]) >= tol) return std::nullopt;
    }
    try {
        const double mean = traj.mass.back();
        return steady_state(setup, mean, traj.terminal_u);
    } catch (const Error&) {
        return std::nullopt;
    }
}

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& traj) {
    os << std::setprecision(17);
    os << "t,energy,mass,u_dot_norm_sq,history_norm_sq,energy_identity_residual\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << traj.times[i] << "," << traj.energy[i] << "," << traj.mass[i] << ","
           << traj.u_dot_norm_sq[i] << "," << traj.history_norm_sq[i] << ","
           << traj.energy_residual[i] << "\n";
    }
}

void write_summary(std::ostream& os, const ProblemSetup& setup, const TrajectoryRecord& traj) {
    const DissipationReport diss = dissipation_check(traj);
    os << std::setprecision(17);
    os << "schema = 1\n";
    os << "n_cells = " << setup.mesh.n_cells << "\n";
    os << "beta = " << setup.cfg.beta << "\n";
    os << "alpha = " << setup.cfg.alpha << "\n";
    os << "dt = " << setup.cfg.dt << "\n";
    os << "t_end = " << traj.times.back() << "\n";
    os << "steps = " << traj.size() - 1 << "\n";
    os << "energy_initial = " << traj.energy.front() << "\n";
    os << "energy_final = " << traj.energy.back() << "\n";
    os << "mass_initial = " << traj.mass.front() << "\n";
    os << "mass_final = " << traj.mass.back() << "\n";
    os << "max_abs_u = " << traj.max_abs_u << "\n";
    os << "max_phase_norm_sq = " << traj.max_phase_norm_sq << "\n";
    os << "max_energy_residual = "
       << *std::max_element(traj.energy_residual.begin(), traj.energy_residual.end(),
                            [](double x, double y) { return std::abs(x) < std::abs(y); })
       << "\n";
    os << "stability_flag = " << (traj.stability_flag ? 1 : 0) << "\n";
    os << "early_stop = " << (traj.early_stop ? 1 : 0) << "\n";
    os << "plateau_detected = " << (diss.plateau_detected ? 1 : 0) << "\n";
    os << "absorbing_radius = " << diss.absorbing_radius << "\n";
    os << "fitted_kappa1 = " << diss.fitted_kappa1 << "\n";
    os << "fitted_plateau = " << diss.fitted_C << "\n";
}

}  // namespace fch
