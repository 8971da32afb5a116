#include "fch/potential.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace fch {

namespace {

double poly_eval(const std::vector<double>& c, double r) {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * r + c[k];
    return v;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t k = 1; k < c.size(); ++k) d.push_back(c[k] * static_cast<double>(k));
    if (d.empty()) d.push_back(0.0);
    return d;
}

double fit_min_fpp(const std::function<double(double)>& Fpp, double r_min, double r_max,
                   int samples) {
    double lo = Fpp(r_min);
    for (int i = 0; i <= samples; ++i) {
        const double r = r_min + (r_max - r_min) * i / samples;
        lo = std::min(lo, Fpp(r));
    }
    return lo;
}

}  // namespace

PotentialSpec make_double_well() {
    PotentialSpec s;
    s.kind = PotentialKind::double_well;
    s.c_F = 4.0;
    s.p = 4.0 / 3.0;
    s.rho = 4.0;
    return s;
}

PotentialSpec make_polynomial(const std::vector<double>& ascending_coefficients) {
    if (ascending_coefficients.size() < 3) {
        throw Error(ErrorCode::parameter, "polynomial potential needs degree >= 2");
    }
    if (ascending_coefficients.back() <= 0.0) {
        throw Error(ErrorCode::parameter,
                    "polynomial potential must have a positive leading coefficient");
    }
    PotentialSpec s;
    s.kind = PotentialKind::polynomial;
    s.coefficients = ascending_coefficients;
    const double d = static_cast<double>(ascending_coefficients.size() - 1);
    s.p = d / (d - 1.0);
    s.rho = std::max(2.0, d);
    // concavity bound fitted by grid minimization of F'' on a wide window
    const auto d2 = poly_derivative(poly_derivative(ascending_coefficients));
    const double lo = fit_min_fpp([&](double r) { return poly_eval(d2, r); }, -20.0, 20.0, 40000);
    s.c_F = std::max(0.0, -lo);
    return s;
}

PotentialValue potential_eval(const PotentialSpec& spec, double r) {
    if (!std::isfinite(r)) {
        throw Error(ErrorCode::parameter, "potential: non-finite argument");
    }
    PotentialValue v{};
    if (spec.kind == PotentialKind::double_well) {
        const double q = r * r - 1.0;
        v.F = q * q;
        v.Fp = 4.0 * r * q;
        v.Fpp = 12.0 * r * r - 4.0;
    } else {
        v.F = poly_eval(spec.coefficients, r);
        const auto d1 = poly_derivative(spec.coefficients);
        const auto d2 = poly_derivative(d1);
        v.Fp = poly_eval(d1, r);
        v.Fpp = poly_eval(d2, r);
    }
    return v;
}

ConvexSplit convex_split(const PotentialSpec& spec, double r) {
    const PotentialValue v = potential_eval(spec, r);
    ConvexSplit s{};
    s.Gp = v.Fp + spec.c_F * r;
    s.linear = spec.c_F * r;
    return s;
}

AssumptionReport verify_assumptions_generic(
    const std::function<double(double)>& F, const std::function<double(double)>& Fp,
    const std::function<double(double)>& Fpp, double p, double rho, double r_min,
    double r_max, int samples) {
    if (!(r_min < r_max)) {
        throw Error(ErrorCode::parameter, "verify_assumptions: empty interval");
    }
    if (samples < 100) {
        throw Error(ErrorCode::parameter, "verify_assumptions: need at least 100 samples");
    }
    AssumptionReport rep;
    rep.r_min = r_min;
    rep.r_max = r_max;
    rep.samples = samples;

    const double inner_scale = 0.8;
    auto sample = [&](int i) { return r_min + (r_max - r_min) * i / samples; };
    auto is_inner = [&](double r) {
        const double mid = 0.5 * (r_min + r_max);
        const double half = 0.5 * (r_max - r_min);
        return std::abs(r - mid) <= inner_scale * half;
    };
    const double growth_margin = 1.10;
    const double pbar = p / (p - 1.0);

    // (N1): F'' bounded below.
    double fpp_lo = Fpp(r_min);
    for (int i = 0; i <= samples; ++i) fpp_lo = std::min(fpp_lo, Fpp(sample(i)));
    rep.c_F = std::max(0.0, -fpp_lo);
    rep.n1 = std::isfinite(fpp_lo);

    // (N2): |F'|^p <= c (|F|+1); constant fitted on the inner window, edge
    // samples must not exceed it beyond the margin.
    double inner_max = 0.0, outer_max = 0.0;
    for (int i = 0; i <= samples; ++i) {
        const double r = sample(i);
        const double ratio = std::pow(std::abs(Fp(r)), p) / (std::abs(F(r)) + 1.0);
        outer_max = std::max(outer_max, ratio);
        if (is_inner(r)) inner_max = std::max(inner_max, ratio);
    }
    rep.c_F_N2 = outer_max;
    rep.n2 = std::isfinite(outer_max) && outer_max <= growth_margin * inner_max;

    // (N3): F >= C1 |r|^(p/(p-1)) - C2 with C1 > 0 fitted at the interval ends.
    {
        const double ratio_lo = F(r_min) / (std::pow(std::abs(r_min), pbar) + 1.0);
        const double ratio_hi = F(r_max) / (std::pow(std::abs(r_max), pbar) + 1.0);
        const double c1 = 0.5 * std::min(ratio_lo, ratio_hi);
        if (c1 > 0.0) {
            double c2 = 0.0;
            for (int i = 0; i <= samples; ++i) {
                const double r = sample(i);
                c2 = std::max(c2, c1 * std::pow(std::abs(r), pbar) - F(r));
            }
            rep.C1 = c1;
            rep.C2 = c2;
            rep.n3 = true;
        } else {
            rep.n3 = false;
        }
    }

    // (N4): |F''| <= C3 (1 + |r|^(rho-2)), same inner-fit/edge-check scheme.
    {
        double inner4 = 0.0, outer4 = 0.0;
        for (int i = 0; i <= samples; ++i) {
            const double r = sample(i);
            const double ratio = std::abs(Fpp(r)) / (1.0 + std::pow(std::abs(r), rho - 2.0));
            outer4 = std::max(outer4, ratio);
            if (is_inner(r)) inner4 = std::max(inner4, ratio);
        }
        rep.C3 = outer4;
        rep.n4 = std::isfinite(outer4) && outer4 <= growth_margin * inner4;
    }

    // consequence of (N3): |F'| <= c' (|F|+1)
    if (rep.n3) {
        double cp = 0.0;
        for (int i = 0; i <= samples; ++i) {
            const double r = sample(i);
            cp = std::max(cp, std::abs(Fp(r)) / (std::abs(F(r)) + 1.0));
        }
        rep.c_prime = cp;
    }
    return rep;
}

AssumptionReport verify_assumptions(const PotentialSpec& spec, double r_min, double r_max,
                                    int samples) {
    return verify_assumptions_generic(
        [&](double r) { return potential_eval(spec, r).F; },
        [&](double r) { return potential_eval(spec, r).Fp; },
        [&](double r) { return potential_eval(spec, r).Fpp; }, spec.p, spec.rho, r_min,
        r_max, samples);
}

}  // namespace fch
