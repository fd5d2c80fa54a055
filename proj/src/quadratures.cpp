#include "silt/quadratures.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <stdexcept>

#include "silt/errors.hpp"

namespace silt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;

void check_lambda(double lambda) {
    if (!(lambda >= 0.5 && lambda < 1.0))
        throw std::invalid_argument(fmt::format("lambda = {} outside [1/2, 1)", lambda));
}

void check_gamma(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("gamma must be positive");
}

// Half-line map x = u/(1-u) with its Jacobian.
inline double half_line(double u, double& jac) {
    const double q = 1.0 - u;
    jac = 1.0 / (q * q);
    return u / q;
}

QuadratureResult quadrant(const Integrand2d& f, double tol) {
    QuadratureOptions opt;
    opt.rel_tol = tol;
    return integrate_2d(
        [&](double u, double v) {
            double ju, jv;
            const double x = half_line(u, ju), y = half_line(v, jv);
            return f(x, y) * ju * jv;
        },
        {0.0, 1.0, 0.0, 1.0}, opt);
}

QuadratureResult require(QuadratureResult r, const char* what) {
    if (!r.converged)
        throw BudgetError(fmt::format("{}: tolerance not reached within {} evaluations (estimate {:.3e})", what,
                                      r.evaluations, r.error_estimate));
    return r;
}

}  // namespace

double kappa_integrand(double r, double s) {
    const double a = 1.0 + r - s;
    return 1.0 / ((1.0 + r) * (1.0 + s) * std::sqrt(a * a + 4.0 * s));
}

QuadratureResult kappa(double tol) {
    if (!(tol >= 1e-10)) throw std::invalid_argument("kappa tolerance must be at least 1e-10");
    QuadratureOptions opt;
    opt.rel_tol = tol;
    opt.max_evaluations = 60'000'000;
    QuadratureResult r = integrate_2d(
        [](double u, double v) {
            double ju, jv;
            const double x = half_line(u, ju), y = half_line(v, jv);
            return kappa_integrand(x, y) * ju * jv;
        },
        {0.0, 1.0, 0.0, 1.0}, opt);
    r = require(r, "kappa");
    r.value -= kPi2 / 6.0;
    return r;
}

QuadratureResult kappa_qmc(int fibonacci_index, int shifts, std::uint64_t seed) {
    // x = log(1+r) = -2 log(1-u), y = w x with w in (0, 1); the integrand is
    // symmetric in (r, s), so the lower triangle is doubled.
    LatticeRuleOptions opt;
    opt.fibonacci_index = fibonacci_index;
    opt.shifts = shifts;
    opt.seed = seed;
    QuadratureResult r = lattice_rule_2d(
        [](double u, double w) {
            if (u >= 1.0) return 0.0;
            const double x = -2.0 * std::log1p(-u);
            const double dx = 2.0 / (1.0 - u);
            const double y = w * x;
            const double a = std::exp(x), b = std::exp(y);
            const double q = (a - b) * (a - b) + 2.0 * (a + b) - 3.0;
            if (!(q > 0.0)) return 0.0;
            return 2.0 * dx * x / std::sqrt(q);
        },
        opt);
    r.value -= kPi2 / 6.0;
    return r;
}

QuadratureResult kappa_reduced(double tol) {
    // inner(r) = integral over s of kappa_integrand(r, s) times (1 + r)
    auto inner = [](double r) {
        if (r == 0.0) return 1.0;
        const double c = r * r + 4.0 * r;
        const double sc = std::sqrt(c);
        return std::log((2.0 * c - 2.0 * r + 2.0 * sc * (1.0 + r)) / (2.0 * sc - 2.0 * r)) / sc;
    };
    QuadratureOptions opt;
    opt.rel_tol = tol;
    QuadratureResult r = integrate_1d(
        [&](double u) {
            double ju;
            const double x = half_line(u, ju);
            return inner(x) / (1.0 + x) * ju;
        },
        0.0, 1.0, opt);
    r = require(r, "kappa_reduced");
    r.value -= kPi2 / 6.0;
    return r;
}

double IdentityCheck::relative_error() const { return std::abs(quadrature - closed_form) / std::abs(closed_form); }

IdentityCheck proof_integral_1d_a3(double lambda, double gamma) {
    check_lambda(lambda);
    check_gamma(gamma);
    const double a = 1.0 - lambda, b = lambda * gamma;
    const QuadratureResult q = require(
        quadrant([&](double x, double y) {
            const double p = a + b * x;
            return b * x / (p * p * (a + b * y) * (a + b * (x + y)));
        },
                 1e-10),
        "proof_integral_1d_a3");
    return {q.value, 1.0 / (a * b * b), q.error_estimate};
}

IdentityPair proof_integrals_1d_a2(double lambda, double gamma) {
    check_lambda(lambda);
    check_gamma(gamma);
    const double a = 1.0 - lambda, b = lambda * gamma;
    const QuadratureResult same = require(
        quadrant([&](double x, double y) { return 1.0 / ((a + b * x) * (a + b * y) * (a + b * (x + y))); }, 1e-10),
        "proof_integrals_1d_a2");
    // opposite signs: |x + y| = |x - w|; fold the kink by w = x t, t in (0, 1)
    QuadratureOptions opt;
    opt.rel_tol = 1e-10;
    const QuadratureResult mixed = require(integrate_2d(
                                               [&](double u, double t) {
                                                   double ju;
                                                   const double x = half_line(u, ju);
                                                   const double w = x * t;
                                                   return 2.0 * x * ju /
                                                          ((a + b * x) * (a + b * w) * (a + b * (x - w)));
                                               },
                                               {0.0, 1.0, 0.0, 1.0}, opt),
                                           "proof_integrals_1d_a2");
    const double closed = kPi2 / (a * b * b);
    IdentityPair out;
    out.first = {2.0 * (same.value + mixed.value), closed, 2.0 * (same.error_estimate + mixed.error_estimate)};
    out.second = {4.0 * same.value, 2.0 * closed / 3.0, 4.0 * same.error_estimate};
    return out;
}

IdentityCheck proof_integral_2d(double lambda) {
    check_lambda(lambda);
    const double a = 1.0 - lambda, h = 0.5 * lambda;
    // polar coordinates in each plane: dt = 2 pi rho d rho
    const QuadratureResult q = require(quadrant(
                                           [&](double r1, double r2) {
                                               const double s1 = r1 * r1, s2 = r2 * r2;
                                               const double p = a + h * s1;
                                               return h * s1 * r1 * r2 / (p * p * (a + h * s2) * (a + h * (s1 + s2)));
                                           },
                                           1e-10),
                                       "proof_integral_2d");
    const double scale = 4.0 * kPi2;
    return {scale * q.value, scale / (lambda * lambda * a), scale * q.error_estimate};
}

QuadratureResult proof_integral_2d_inner(double tol) {
    return require(quadrant([](double r, double s) { return r / ((1 + r) * (1 + r) * (1 + s) * (1 + r + s)); }, tol),
                   "proof_integral_2d_inner");
}

double kappa_value() {
    static const double value = kappa(1e-8).value;
    return value;
}

double theorem1_constant(const IncrementLaw& law) {
    if (law.dimension() == 1) {
        const auto g = law.gamma();
        if (!g) throw std::invalid_argument(fmt::format("law '{}' carries no gamma", law.name()));
        return 4.0 * (1.0 / (12.0 * *g * *g) + 1.0 / (kPi2 * *g * *g));
    }
    const auto cov = law.covariance();
    if (!cov) throw std::invalid_argument(fmt::format("law '{}' carries no covariance", law.name()));
    return (1.0 + kappa_value()) / (kPi2 * cov->determinant());
}

}  // namespace silt
