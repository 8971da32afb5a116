#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fch/error.hpp"

namespace fch {

enum class PotentialKind { double_well, polynomial };

/// Nonlinear bulk potential together with the constants entering the growth
/// assumptions. For the double well F(r) = (r^2 - 1)^2 the constants are
/// analytic: concavity bound 4, growth exponent p = 4/3, degree rho = 4.
/// Polynomial potentials take ascending coefficients; their constants are
/// fitted on construction.
struct PotentialSpec {
    PotentialKind kind = PotentialKind::double_well;
    std::vector<double> coefficients;  // polynomial kind only, ascending powers
    double c_F = 4.0;                  // lower bound on -F''
    double p = 4.0 / 3.0;              // exponent in |F'|^p <= c(|F|+1)
    double rho = 4.0;                  // degree bound in |F''| <= C(1+|r|^(rho-2))
};

PotentialSpec make_double_well();
PotentialSpec make_polynomial(const std::vector<double>& ascending_coefficients);

struct PotentialValue {
    double F;
    double Fp;
    double Fpp;
};

PotentialValue potential_eval(const PotentialSpec& spec, double r);

/// Convex-concave split F' = G' - c_F r with G'' = F'' + c_F >= 0.
struct ConvexSplit {
    double Gp;
    double linear;  // c_F * r
};

ConvexSplit convex_split(const PotentialSpec& spec, double r);

struct AssumptionReport {
    bool n1 = false;
    bool n2 = false;
    bool n3 = false;
    bool n4 = false;
    double c_F = 0.0;      // fitted concavity bound (N1)
    double c_F_N2 = 0.0;   // fitted constant of (N2)
    double C1 = 0.0;       // fitted coercivity constants of (N3)
    double C2 = 0.0;
    double C3 = 0.0;       // fitted constant of (N4)
    double c_prime = 0.0;  // fitted constant of |F'| <= c'(|F|+1)
    double r_min = 0.0;
    double r_max = 0.0;
    int samples = 0;

    bool all_pass() const { return n1 && n2 && n3 && n4; }
};

/// Samples the growth assumptions on [r_min, r_max]. Failures are report
/// entries, never exceptions. Fitted constants come from an inner window so
/// that growth beyond the declared polynomial class shows up as failure at
/// the edges of the interval.
AssumptionReport verify_assumptions(const PotentialSpec& spec, double r_min, double r_max,
                                    int samples);

/// Assumption check against arbitrary callables (used for counterexamples).
AssumptionReport verify_assumptions_generic(
    const std::function<double(double)>& F, const std::function<double(double)>& Fp,
    const std::function<double(double)>& Fpp, double p, double rho, double r_min,
    double r_max, int samples);

}  // namespace fch
