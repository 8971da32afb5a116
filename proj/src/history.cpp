#include "fch/history.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace fch {

namespace {

bool kernels_match(const KernelSpec& a, const KernelSpec& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == KernelKind::exponential_sum) {
        if (a.terms.size() != b.terms.size()) return false;
        for (std::size_t i = 0; i < a.terms.size(); ++i) {
            if (a.terms[i].c != b.terms[i].c || a.terms[i].lambda != b.terms[i].lambda)
                return false;
        }
        return true;
    }
    return a.table_s == b.table_s && a.table_nu == b.table_nu;
}

int aligned_shift(const HistoryGrid& h, double dt) {
    const double ratio = dt / h.grid.ds;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded)) {
        std::ostringstream oss;
        oss << "transport step: dt = " << dt << " is not an integer multiple of the s-grid "
            << "spacing " << h.grid.ds;
        throw Error(ErrorCode::alignment, oss.str());
    }
    return static_cast<int>(rounded);
}

// H^(-1) coefficient rows scaled by 1/sqrt(lambda_k): row dot products give
// the mean-zero negative-norm inner products.
Mat neg_half_coefficients(const Mat& values, const NeumannOperator& an) {
    const Eigenbasis& eig = an.eigen();
    const Mat c = (values * an.lumped_mass().asDiagonal()) * eig.vectors;
    Mat out(values.rows(), eig.count - 1);
    for (int k = 1; k < eig.count; ++k) {
        out.col(k - 1) = c.col(k) / std::sqrt(eig.values(k));
    }
    return out;
}

}  // namespace

HistoryGrid make_zero_history_grid(const SGrid& grid, int n_nodes) {
    HistoryGrid h;
    h.grid = grid;
    h.values = Mat::Zero(grid.n_s + 1, n_nodes);
    return h;
}

HistoryMoments make_zero_history_moments(const PronySet& prony, int n_nodes) {
    HistoryMoments h;
    h.prony = prony;
    h.terms.resize(prony.terms.size());
    for (auto& t : h.terms) {
        t.m = Vec::Zero(n_nodes);
        t.n = 0.0;
    }
    return h;
}

HistoryGrid init_history_from_past(const std::function<Vec(double)>& mu_past,
                                   const SGrid& grid, const NeumannOperator& an,
                                   double available_past) {
    if (available_past < grid.s_max) {
        std::ostringstream oss;
        oss << "history init: past data covers only [0, " << available_past
            << "] but the s-grid needs [0, " << grid.s_max << "]";
        throw Error(ErrorCode::truncation, oss.str());
    }
    const int n_nodes = static_cast<int>(mu_past(0.0).size());
    HistoryGrid h = make_zero_history_grid(grid, n_nodes);
    Vec g_prev = an.apply(mu_past(0.0));
    Vec accum = Vec::Zero(n_nodes);
    for (int q = 1; q <= grid.n_s; ++q) {
        const Vec g_q = an.apply(mu_past(grid.nodes[static_cast<std::size_t>(q)]));
        accum += 0.5 * grid.ds * (g_prev + g_q);
        h.values.row(q) = accum.transpose();
        g_prev = g_q;
    }
    return h;
}

HistoryMoments moments_from_grid(const HistoryGrid& h, const PronySet& prony,
                                 const NeumannOperator& an) {
    HistoryMoments m = make_zero_history_moments(prony, h.n_nodes());
    const Mat B = neg_half_coefficients(h.values, an);
    for (std::size_t i = 0; i < prony.terms.size(); ++i) {
        const double lambda = prony.terms[i].lambda;
        const auto w = exponential_hat_weights(h.grid, lambda);
        Vec mi = Vec::Zero(h.n_nodes());
        for (int q = 0; q <= h.grid.n_s; ++q) {
            mi += w[static_cast<std::size_t>(q)] * h.values.row(q).transpose();
        }
        m.terms[i].m = mi;
        double n = 0.0;
        const double ds = h.grid.ds;
        for (int j = 0; j < h.grid.n_s; ++j) {
            const double m0 = exp_cell_moment(lambda, j * ds, ds, 0);
            const double m1 = exp_cell_moment(lambda, j * ds, ds, 1);
            const double m2 = exp_cell_moment(lambda, j * ds, ds, 2);
            const auto left = B.row(j);
            const auto delta = (B.row(j + 1) - B.row(j)).eval();
            n += m0 * left.squaredNorm() + 2.0 * (m1 / ds) * left.dot(delta) +
                 (m2 / (ds * ds)) * delta.squaredNorm();
        }
        m.terms[i].n = n;
    }
    return m;
}

void transport_step(HistoryGrid& h, const Vec& g, double dt) {
    const int shift = aligned_shift(h, dt);
    const int n_s = h.grid.n_s;
    for (int q = n_s; q > shift; --q) {
        h.values.row(q) = h.values.row(q - shift) + dt * g.transpose();
    }
    for (int q = shift; q >= 0; --q) {
        h.values.row(q) = (q * h.grid.ds) * g.transpose();
    }
}

void moment_step(HistoryMoments& h, const Vec& g, double dt, const NeumannOperator& an) {
    const double b = an.h_neg1_inner(g, g);
    for (std::size_t i = 0; i < h.terms.size(); ++i) {
        const double lambda = h.prony.terms[i].lambda;
        const double x = lambda * dt;
        const double e = std::exp(-x);
        const double a = an.h_neg1_inner(h.terms[i].m, g);
        h.terms[i].n = e * h.terms[i].n + 2.0 * a * dt * e +
                       (2.0 * b / (lambda * lambda)) * exp_lower_moment(1, x);
        h.terms[i].m = e * h.terms[i].m + (exp_lower_moment(0, x) / lambda) * g;
    }
}

Vec memory_integral(const HistoryGrid& h) {
    Vec w = Vec::Zero(h.n_nodes());
    for (int q = 0; q <= h.grid.n_s; ++q) {
        w += h.grid.weights[static_cast<std::size_t>(q)] * h.values.row(q).transpose();
    }
    return w;
}

Vec memory_integral(const HistoryMoments& h) {
    Vec w = Vec::Zero(h.n_nodes());
    for (std::size_t i = 0; i < h.terms.size(); ++i) {
        w += h.prony.terms[i].c * h.terms[i].m;
    }
    return w;
}

Vec memory_integral(const HistoryGrid& h, const KernelSpec& kernel) {
    if (!kernels_match(h.grid.kernel, kernel)) {
        throw Error(ErrorCode::configuration,
                    "memory integral: kernel does not match the history's s-grid");
    }
    return memory_integral(h);
}

Vec memory_integral(const HistoryMoments& h, const KernelSpec& kernel) {
    if (kernel.kind != KernelKind::exponential_sum ||
        kernel.terms.size() != h.prony.terms.size()) {
        throw Error(ErrorCode::configuration,
                    "memory integral: kernel does not match the moment representation");
    }
    for (std::size_t i = 0; i < kernel.terms.size(); ++i) {
        if (kernel.terms[i].c != h.prony.terms[i].c ||
            kernel.terms[i].lambda != h.prony.terms[i].lambda) {
            throw Error(ErrorCode::configuration,
                        "memory integral: kernel does not match the moment representation");
        }
    }
    return memory_integral(h);
}

double history_norm_sq(const HistoryGrid& h, const NeumannOperator& an, HistoryWeight w) {
    const Mat B = neg_half_coefficients(h.values, an);
    const auto& m0 = (w == HistoryWeight::nu) ? h.grid.nu_m0 : h.grid.dnu_m0;
    const auto& m1 = (w == HistoryWeight::nu) ? h.grid.nu_m1 : h.grid.dnu_m1;
    const auto& m2 = (w == HistoryWeight::nu) ? h.grid.nu_m2 : h.grid.dnu_m2;
    const double ds = h.grid.ds;
    double total = 0.0;
    for (int j = 0; j < h.grid.n_s; ++j) {
        const std::size_t ju = static_cast<std::size_t>(j);
        const auto left = B.row(j);
        const auto delta = (B.row(j + 1) - B.row(j)).eval();
        total += m0[ju] * left.squaredNorm() + 2.0 * (m1[ju] / ds) * left.dot(delta) +
                 (m2[ju] / (ds * ds)) * delta.squaredNorm();
    }
    return total;
}

double history_norm_sq(const HistoryMoments& h, HistoryWeight w) {
    double total = 0.0;
    for (std::size_t i = 0; i < h.terms.size(); ++i) {
        const double factor = (w == HistoryWeight::nu)
                                  ? h.prony.terms[i].c
                                  : h.prony.terms[i].c * h.prony.terms[i].lambda;
        total += factor * h.terms[i].n;
    }
    return total;
}

double history_norm(const HistoryGrid& h, const NeumannOperator& an, HistoryWeight w) {
    return std::sqrt(std::max(0.0, history_norm_sq(h, an, w)));
}

double history_norm_sq(const HistoryState& h, const NeumannOperator& an, HistoryWeight w) {
    if (std::holds_alternative<HistoryGrid>(h)) {
        return history_norm_sq(std::get<HistoryGrid>(h), an, w);
    }
    return history_norm_sq(std::get<HistoryMoments>(h), w);
}

Vec memory_integral(const HistoryState& h) {
    if (std::holds_alternative<HistoryGrid>(h)) return memory_integral(std::get<HistoryGrid>(h));
    return memory_integral(std::get<HistoryMoments>(h));
}

void history_step(HistoryState& h, const Vec& g, double dt, const NeumannOperator& an) {
    if (std::holds_alternative<HistoryGrid>(h)) {
        transport_step(std::get<HistoryGrid>(h), g, dt);
    } else {
        moment_step(std::get<HistoryMoments>(h), g, dt, an);
    }
}

HistoryState history_difference(const HistoryState& a, const HistoryState& b) {
    if (std::holds_alternative<HistoryGrid>(a) && std::holds_alternative<HistoryGrid>(b)) {
        const auto& ga = std::get<HistoryGrid>(a);
        const auto& gb = std::get<HistoryGrid>(b);
        if (ga.grid.n_s != gb.grid.n_s || ga.n_nodes() != gb.n_nodes()) {
            throw Error(ErrorCode::configuration, "history difference: shape mismatch");
        }
        HistoryGrid d = ga;
        d.values -= gb.values;
        return d;
    }
    throw Error(ErrorCode::configuration,
                "history difference requires two grid representations; moment-mode "
                "differences are tracked by paired runs");
}

void validate_history(const HistoryGrid& h, const NeumannOperator& an, double tol) {
    if (h.values.row(0).cwiseAbs().maxCoeff() > tol) {
        throw Error(ErrorCode::invariant_breach, "history: eta(0) must vanish");
    }
    for (int q = 0; q <= h.grid.n_s; ++q) {
        const double m = an.mean(h.values.row(q).transpose());
        if (std::abs(m) > tol) {
            std::ostringstream oss;
            oss << "history: row " << q << " has spatial mean " << m;
            throw Error(ErrorCode::invariant_breach, oss.str());
        }
    }
}

void validate_history(const HistoryMoments& h, const NeumannOperator& an, double tol) {
    for (std::size_t i = 0; i < h.terms.size(); ++i) {
        const double m = an.mean(h.terms[i].m);
        if (std::abs(m) > tol) {
            std::ostringstream oss;
            oss << "history: moment " << i << " has spatial mean " << m;
            throw Error(ErrorCode::invariant_breach, oss.str());
        }
    }
}

void save_history_grid(std::ostream& os, const HistoryGrid& h) {
    os << std::setprecision(17);
    os << h.grid.n_s << " " << h.grid.s_max << " " << h.n_nodes() << "\n";
    if (h.grid.kernel.kind == KernelKind::exponential_sum) {
        os << "exponential_sum " << h.grid.kernel.terms.size() << "\n";
        for (const auto& t : h.grid.kernel.terms) os << t.c << " " << t.lambda << "\n";
    } else {
        os << "tabulated " << h.grid.kernel.table_s.size() << "\n";
        for (std::size_t j = 0; j < h.grid.kernel.table_s.size(); ++j) {
            os << h.grid.kernel.table_s[j] << " " << h.grid.kernel.table_nu[j] << "\n";
        }
    }
    for (int q = 0; q <= h.grid.n_s; ++q) {
        for (int j = 0; j < h.n_nodes(); ++j) {
            os << h.values(q, j) << (j + 1 == h.n_nodes() ? "" : " ");
        }
        os << "\n";
    }
}

HistoryGrid load_history_grid(std::istream& is, double truncation_tol) {
    int n_s = 0, n_nodes = 0;
    double s_max = 0.0;
    if (!(is >> n_s >> s_max >> n_nodes)) {
        throw Error(ErrorCode::io, "history checkpoint: bad header");
    }
    std::string kind;
    std::size_t count = 0;
    if (!(is >> kind >> count)) {
        throw Error(ErrorCode::io, "history checkpoint: bad kernel header");
    }
    KernelSpec kernel;
    if (kind == "exponential_sum") {
        std::vector<KernelTerm> terms(count);
        for (auto& t : terms) {
            if (!(is >> t.c >> t.lambda)) {
                throw Error(ErrorCode::io, "history checkpoint: bad kernel terms");
            }
        }
        kernel = make_exponential_kernel(terms);
    } else if (kind == "tabulated") {
        std::vector<double> s(count), nu(count);
        for (std::size_t j = 0; j < count; ++j) {
            if (!(is >> s[j] >> nu[j])) {
                throw Error(ErrorCode::io, "history checkpoint: bad kernel table");
            }
        }
        kernel = make_tabulated_kernel(std::move(s), std::move(nu));
    } else {
        throw Error(ErrorCode::io, "history checkpoint: unknown kernel kind " + kind);
    }
    HistoryGrid h = make_zero_history_grid(build_s_grid(kernel, s_max, n_s, truncation_tol),
                                           n_nodes);
    for (int q = 0; q <= n_s; ++q) {
        for (int j = 0; j < n_nodes; ++j) {
            if (!(is >> h.values(q, j))) {
                throw Error(ErrorCode::io, "history checkpoint: truncated values");
            }
        }
    }
    return h;
}

}  // namespace fch
