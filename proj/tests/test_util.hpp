#pragma once

// Independent numerical oracles shared by the test suites. Everything in this
// header is deliberately implemented without touching the library's own
// quadrature or special-function code paths.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

// Spouge's approximation of the Gamma function (independent of std::tgamma).
inline double spouge_gamma(double x) {
    if (x < 0.5) {
        return M_PI / (std::sin(M_PI * x) * spouge_gamma(1.0 - x));
    }
    const int a = 12;
    x -= 1.0;
    double acc = std::sqrt(2.0 * M_PI);
    double factorial = 1.0;
    for (int k = 1; k < a; ++k) {
        const double ck = std::pow(a - k, k - 0.5) * std::exp(a - k) / factorial;
        acc += (k % 2 == 1 ? ck : -ck) / (x + k);
        factorial *= -static_cast<double>(k);
    }
    return acc * std::pow(x + a, x + 0.5) * std::exp(-(x + a));
}

// Adaptive Simpson on a finite interval.
inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a,
                                   double b, double fa, double fm, double fb, double whole,
                                   double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 40) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// Brute-force value of the double integral over [a,b]^2 of
// (phi(x) - phi(y))^2 |x - y|^(-1-2 beta), by reduction to the difference
// coordinate: 2 int_0^(b-a) t^(-1-2b) G(t) dt with
// G(t) = int_a^(b-t) (phi(x) - phi(x+t))^2 dx. The x-integral runs through
// adaptive Simpson and the t-integral through dyadically graded panels, so
// nothing is shared with the library's assembly path.
inline double diagonal_pair_integral(const std::function<double(double)>& phi, double a,
                                     double b, double beta) {
    static const double gp[8] = {0.019855071751231856, 0.10166676129318664,
                                 0.2372337950418355,   0.4082826787521751,
                                 0.5917173212478249,   0.7627662049581645,
                                 0.8983332387068134,   0.9801449282487682};
    static const double gw[8] = {0.05061426814518813, 0.11119051722668723,
                                 0.15685332293894363, 0.18134189168918097,
                                 0.18134189168918097, 0.15685332293894363,
                                 0.11119051722668723, 0.05061426814518813};
    auto G = [&](double t) {
        if (t <= 0.0 || t >= b - a) return 0.0;
        return adaptive_simpson(
            [&](double x) {
                const double d = phi(x) - phi(x + t);
                return d * d;
            },
            a, b - t, 1e-14, 44);
    };
    const double W = b - a;
    double total = 0.0;
    double outer = W;
    for (int lvl = 0; lvl < 52; ++lvl) {
        const double inner = outer * 0.5;
        double panel = 0.0;
        for (int q = 0; q < 8; ++q) {
            const double t = inner + (outer - inner) * gp[q];
            panel += gw[q] * std::pow(t, -1.0 - 2.0 * beta) * G(t);
        }
        total += (outer - inner) * panel;
        outer = inner;
    }
    return 2.0 * total;
}

inline std::uint64_t splitmix(std::uint64_t& s) {
    s += 0x9E3779B97f4A7C15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline double uniform(std::uint64_t& s, double lo = -1.0, double hi = 1.0) {
    const double u = static_cast<double>(splitmix(s) >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

}  // namespace oracle
