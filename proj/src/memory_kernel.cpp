#include "fch/memory_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fch {

double exp_lower_moment(int m, double x) {
    if (x < 0.5) {
        double sum = std::pow(x, m + 1) / (m + 1);  // n = 0 term
        double fact = 1.0;
        for (int n = 1; n < 30; ++n) {
            fact *= -x / n;
            const double t = std::pow(x, m + 1) * fact / (n + m + 1);
            sum += t;
            if (std::abs(t) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    switch (m) {
        case 0: return -std::expm1(-x);
        case 1: return 1.0 - std::exp(-x) * (1.0 + x);
        case 2: return 2.0 - std::exp(-x) * (2.0 + 2.0 * x + x * x);
        default: throw Error(ErrorCode::parameter, "exp_lower_moment: unsupported moment");
    }
}

double exp_cell_moment(double lambda, double s0, double ds, int m) {
    return std::exp(-lambda * s0) * exp_lower_moment(m, lambda * ds) / std::pow(lambda, m);
}

namespace {

double interp_table(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return 0.0;  // compact-support model beyond the table
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double t = (x - xs[j]) / (xs[j + 1] - xs[j]);
    return ys[j] + t * (ys[j + 1] - ys[j]);
}

double table_slope(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x >= xs.back()) return 0.0;
    std::size_t j = 0;
    if (x > xs.front()) {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        j = static_cast<std::size_t>(it - xs.begin()) - 1;
        if (j + 1 >= xs.size()) return 0.0;
    }
    return (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
}

}  // namespace

double KernelSpec::eval(double s) const {
    if (kind == KernelKind::exponential_sum) {
        double v = 0.0;
        for (const auto& t : terms) v += t.c * t.lambda * std::exp(-t.lambda * s);
        return v;
    }
    return interp_table(table_s, table_nu, s);
}

double KernelSpec::eval_derivative(double s) const {
    if (kind == KernelKind::exponential_sum) {
        double v = 0.0;
        for (const auto& t : terms) v -= t.c * t.lambda * t.lambda * std::exp(-t.lambda * s);
        return v;
    }
    return table_slope(table_s, table_nu, s);
}

double KernelSpec::mass() const {
    if (kind == KernelKind::exponential_sum) {
        double v = 0.0;
        for (const auto& t : terms) v += t.c;
        return v;
    }
    double v = 0.0;
    for (std::size_t j = 0; j + 1 < table_s.size(); ++j) {
        v += 0.5 * (table_nu[j] + table_nu[j + 1]) * (table_s[j + 1] - table_s[j]);
    }
    return v;
}

double KernelSpec::mass_tail(double s_max) const {
    if (kind == KernelKind::exponential_sum) {
        double v = 0.0;
        for (const auto& t : terms) v += t.c * std::exp(-t.lambda * s_max);
        return v;
    }
    double v = 0.0;
    for (std::size_t j = 0; j + 1 < table_s.size(); ++j) {
        const double a = std::max(table_s[j], s_max);
        const double b = table_s[j + 1];
        if (b <= a) continue;
        v += 0.5 * (interp_table(table_s, table_nu, a) + table_nu[j + 1]) * (b - a);
    }
    return v;
}

double KernelSpec::first_moment() const {
    if (kind == KernelKind::exponential_sum) {
        double v = 0.0;
        for (const auto& t : terms) v += t.c / t.lambda;
        return v;
    }
    double v = 0.0;
    for (std::size_t j = 0; j + 1 < table_s.size(); ++j) {
        const double a = table_s[j], b = table_s[j + 1];
        const double fa = table_nu[j] * a, fb = table_nu[j + 1] * b;
        // s*nu is piecewise quadratic; Simpson is exact
        const double mid = 0.5 * (a + b) * interp_table(table_s, table_nu, 0.5 * (a + b));
        v += (b - a) / 6.0 * (fa + 4.0 * mid + fb);
    }
    return v;
}

KernelSpec make_exponential_kernel(const std::vector<KernelTerm>& terms) {
    if (terms.empty()) {
        throw Error(ErrorCode::parameter, "kernel: need at least one term");
    }
    double mass = 0.0;
    for (const auto& t : terms) {
        if (!(t.c > 0.0) || !(t.lambda > 0.0)) {
            throw Error(ErrorCode::parameter, "kernel: weights and rates must be positive");
        }
        mass += t.c;
    }
    if (std::abs(mass - 1.0) > 1e-12) {
        throw Error(ErrorCode::parameter, "kernel: weights must sum to 1");
    }
    KernelSpec spec;
    spec.kind = KernelKind::exponential_sum;
    spec.terms = terms;
    spec.lambda_K5 = terms.front().lambda;
    for (const auto& t : terms) spec.lambda_K5 = std::min(spec.lambda_K5, t.lambda);
    return spec;
}

KernelSpec make_relaxation_kernel(double epsilon) {
    if (!(epsilon > 0.0)) {
        throw Error(ErrorCode::parameter, "relaxation kernel: epsilon must be positive");
    }
    return make_exponential_kernel({{1.0, 1.0 / epsilon}});
}

KernelSpec make_tabulated_kernel(std::vector<double> s, std::vector<double> nu) {
    if (s.size() != nu.size() || s.size() < 2) {
        throw Error(ErrorCode::parameter, "tabulated kernel: need matching columns, >= 2 rows");
    }
    if (s.front() != 0.0) {
        throw Error(ErrorCode::parameter, "tabulated kernel: table must start at s = 0");
    }
    for (std::size_t j = 0; j + 1 < s.size(); ++j) {
        if (!(s[j + 1] > s[j])) {
            throw Error(ErrorCode::parameter, "tabulated kernel: s column must increase");
        }
    }
    KernelSpec spec;
    spec.kind = KernelKind::tabulated;
    spec.table_s = std::move(s);
    spec.table_nu = std::move(nu);
    return spec;
}

KernelSpec load_tabulated_kernel(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open kernel file: " + path);
    std::vector<double> s, nu;
    double a, b;
    while (in >> a >> b) {
        s.push_back(a);
        nu.push_back(b);
    }
    return make_tabulated_kernel(std::move(s), std::move(nu));
}

KernelReport validate_kernel(const KernelSpec& spec, double s_max, int samples) {
    if (samples < 100) {
        throw Error(ErrorCode::parameter, "validate_kernel: need at least 100 samples");
    }
    if (!(s_max > 0.0)) {
        throw Error(ErrorCode::parameter, "validate_kernel: s_max must be positive");
    }
    KernelReport rep;
    rep.k0 = spec.mass();
    rep.nu0 = spec.eval(0.0);

    bool nonneg = true, nonincreasing = true;
    for (int i = 0; i <= samples; ++i) {
        const double s = s_max * i / samples;
        if (spec.eval(s) < -1e-14) nonneg = false;
        if (spec.eval_derivative(s) > 1e-12) nonincreasing = false;
    }
    rep.k1 = nonneg && std::isfinite(rep.k0);
    rep.k2 = nonincreasing;
    rep.k3 = std::abs(rep.k0 - 1.0) <= 1e-12;
    rep.k4 = std::isfinite(rep.nu0);

    auto k5_holds = [&](double lambda) {
        for (int i = 0; i <= samples; ++i) {
            const double s = s_max * i / samples;
            if (spec.eval_derivative(s) + lambda * spec.eval(s) > 1e-12) return false;
        }
        return true;
    };
    if (spec.lambda_K5 > 0.0) {
        rep.lambda_K5 = spec.lambda_K5;
        rep.k5 = k5_holds(spec.lambda_K5);
    } else {
        for (double lambda : {0.1, 1.0, 10.0}) {
            if (k5_holds(lambda)) {
                rep.k5 = true;
                rep.lambda_K5 = lambda;
                break;
            }
        }
    }
    return rep;
}

PronySet prony_reduce(const KernelSpec& spec) {
    if (spec.kind != KernelKind::exponential_sum) {
        throw Error(ErrorCode::unsupported_reduction,
                    "prony reduction is exact only for exponential-sum kernels");
    }
    return PronySet{spec.terms};
}

SGrid build_s_grid(const KernelSpec& spec, double s_max, int n_s, double truncation_tol) {
    if (!(s_max > 0.0)) {
        throw Error(ErrorCode::parameter, "s-grid: s_max must be positive");
    }
    if (n_s < 8) {
        throw Error(ErrorCode::parameter, "s-grid: need at least 8 cells");
    }
    const double tail = spec.mass_tail(s_max);
    if (tail > truncation_tol) {
        double suggestion = 2.0 * s_max;
        if (spec.kind == KernelKind::exponential_sum) {
            double lmin = spec.terms.front().lambda;
            for (const auto& t : spec.terms) lmin = std::min(lmin, t.lambda);
            suggestion = std::log(std::max(spec.mass() / truncation_tol, 2.0)) / lmin;
        }
        std::ostringstream oss;
        oss << "s-grid: tail mass " << tail << " above tolerance " << truncation_tol
            << "; increase s_max to about " << suggestion;
        throw Error(ErrorCode::truncation, oss.str());
    }

    SGrid g;
    g.s_max = s_max;
    g.n_s = n_s;
    g.ds = s_max / n_s;
    g.tail_mass = tail;
    g.kernel = spec;
    g.nodes.resize(static_cast<std::size_t>(n_s) + 1);
    for (int q = 0; q <= n_s; ++q) g.nodes[static_cast<std::size_t>(q)] = q * g.ds;
    g.nodes[0] = 0.0;

    g.nu_m0.assign(static_cast<std::size_t>(n_s), 0.0);
    g.nu_m1.assign(static_cast<std::size_t>(n_s), 0.0);
    g.nu_m2.assign(static_cast<std::size_t>(n_s), 0.0);
    g.dnu_m0.assign(static_cast<std::size_t>(n_s), 0.0);
    g.dnu_m1.assign(static_cast<std::size_t>(n_s), 0.0);
    g.dnu_m2.assign(static_cast<std::size_t>(n_s), 0.0);

    if (spec.kind == KernelKind::exponential_sum) {
        for (int j = 0; j < n_s; ++j) {
            const double s0 = j * g.ds;
            for (const auto& t : spec.terms) {
                for (int m = 0; m < 3; ++m) {
                    const double v = t.c * exp_cell_moment(t.lambda, s0, g.ds, m);
                    (m == 0 ? g.nu_m0 : m == 1 ? g.nu_m1 : g.nu_m2)[static_cast<std::size_t>(j)] += v;
                    (m == 0 ? g.dnu_m0 : m == 1 ? g.dnu_m1 : g.dnu_m2)[static_cast<std::size_t>(j)] +=
                        t.lambda * v;
                }
            }
        }
    } else {
        // walk cell intersected with table segments; nu linear on each piece,
        // 3-point Gauss is exact for the cubic integrands
        const double gp[3] = {0.5 - std::sqrt(0.15), 0.5, 0.5 + std::sqrt(0.15)};
        const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        for (int j = 0; j < n_s; ++j) {
            const double c0 = j * g.ds, c1 = (j + 1) * g.ds;
            std::vector<double> cuts{c0, c1};
            for (double sb : spec.table_s) {
                if (sb > c0 && sb < c1) cuts.push_back(sb);
            }
            std::sort(cuts.begin(), cuts.end());
            for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
                const double a = cuts[p], b = cuts[p + 1];
                if (b <= a) continue;
                const double slope = table_slope(spec.table_s, spec.table_nu, 0.5 * (a + b));
                for (int q = 0; q < 3; ++q) {
                    const double s = a + (b - a) * gp[q];
                    const double w = gw[q] * (b - a);
                    const double nu = interp_table(spec.table_s, spec.table_nu, s);
                    const double sig = s - c0;
                    g.nu_m0[static_cast<std::size_t>(j)] += w * nu;
                    g.nu_m1[static_cast<std::size_t>(j)] += w * nu * sig;
                    g.nu_m2[static_cast<std::size_t>(j)] += w * nu * sig * sig;
                    g.dnu_m0[static_cast<std::size_t>(j)] += w * (-slope);
                    g.dnu_m1[static_cast<std::size_t>(j)] += w * (-slope) * sig;
                    g.dnu_m2[static_cast<std::size_t>(j)] += w * (-slope) * sig * sig;
                }
            }
        }
    }

    g.weights.assign(static_cast<std::size_t>(n_s) + 1, 0.0);
    for (int j = 0; j < n_s; ++j) {
        const std::size_t ju = static_cast<std::size_t>(j);
        const double rising = g.nu_m1[ju] / g.ds;          // hat of node j+1 on cell j
        const double falling = g.nu_m0[ju] - rising;       // hat of node j on cell j
        g.weights[ju] += falling;
        g.weights[ju + 1] += rising;
    }
    return g;
}

std::vector<double> exponential_hat_weights(const SGrid& grid, double lambda) {
    std::vector<double> w(static_cast<std::size_t>(grid.n_s) + 1, 0.0);
    for (int j = 0; j < grid.n_s; ++j) {
        const double s0 = j * grid.ds;
        const double m0 = exp_cell_moment(lambda, s0, grid.ds, 0);
        const double m1 = exp_cell_moment(lambda, s0, grid.ds, 1);
        const double rising = m1 / grid.ds;
        w[static_cast<std::size_t>(j)] += m0 - rising;
        w[static_cast<std::size_t>(j) + 1] += rising;
    }
    return w;
}

}  // namespace fch
