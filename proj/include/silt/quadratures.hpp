#pragma once

#include "silt/cubature.hpp"
#include "silt/increment_laws.hpp"

namespace silt {

/// 1 / [(1+r)(1+s) sqrt((1+r+s)^2 - 4rs)]
double kappa_integrand(double r, double s);

/// The double integral of kappa_integrand over the positive quadrant minus
/// pi^2/6, by adaptive cubature on the unit square after r = u/(1-u),
/// s = v/(1-v). Throws BudgetError if tol is not met.
QuadratureResult kappa(double tol = 1e-8);

/// Same constant from a randomly shifted lattice rule in logarithmic
/// coordinates, independent of the adaptive route.
QuadratureResult kappa_qmc(int fibonacci_index = 28, int shifts = 16, std::uint64_t seed = 0x6b617070);

/// Same constant from the closed-form inner integral and 1-D adaptive
/// quadrature in the remaining variable.
QuadratureResult kappa_reduced(double tol = 1e-13);

struct IdentityCheck {
    double quadrature = 0.0;
    double closed_form = 0.0;
    double error_estimate = 0.0;

    double relative_error() const;
};

/// Integral over [0, inf)^2 of lg x / [(1-l+lg x)^2 (1-l+lg y)(1-l+lg(x+y))]
/// against (1-l)^{-1} (l g)^{-2}.
IdentityCheck proof_integral_1d_a3(double lambda, double gamma);

struct IdentityPair {
    IdentityCheck first;   // kernel 1-l+lg|x+y|, closed form pi^2 (1-l)^{-1} (l g)^{-2}
    IdentityCheck second;  // kernel 1-l+lg(|x|+|y|), two thirds of the above
};

IdentityPair proof_integrals_1d_a2(double lambda, double gamma);

/// Integral over R^2 x R^2 of (l/2)|t1|^2 / [(1-l+l|t1|^2/2)^2 (1-l+l|t2|^2/2)(1-l+l(|t1|^2+|t2|^2)/2)]
/// in polar form against (2 pi)^2 l^{-2} (1-l)^{-1}.
IdentityCheck proof_integral_2d(double lambda);

/// Integral over [0, inf)^2 of r / [(1+r)^2 (1+s)(1+r+s)], which equals 1.
QuadratureResult proof_integral_2d_inner(double tol = 1e-11);

/// 4(1/(12 g^2) + 1/(pi^2 g^2)) in d = 1 and (1 + kappa)/(pi^2 |Sigma|) in d = 2.
double theorem1_constant(const IncrementLaw& law);

/// Cached kappa(1e-8) value used by theorem1_constant.
double kappa_value();

}  // namespace silt
