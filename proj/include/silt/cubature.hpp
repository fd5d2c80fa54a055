#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace silt {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

struct QuadratureOptions {
    double abs_tol = 0.0;
    double rel_tol = 1e-10;
    std::size_t max_evaluations = 20'000'000;
};

struct Rect {
    double x0, x1, y0, y1;
};

using Integrand1d = std::function<double(double)>;
using Integrand2d = std::function<double(double, double)>;

/// Globally adaptive Gauss-Kronrod (7, 15) on [a, b]. The interval with the
/// largest error estimate is bisected until the total estimate meets
/// max(abs_tol, rel_tol |I|) or the evaluation budget runs out; the result is
/// then marked unconverged rather than thrown.
QuadratureResult integrate_1d(const Integrand1d& f, double a, double b, const QuadratureOptions& opt = {});

/// Globally adaptive tensor Gauss-Kronrod (7, 15) cubature on a rectangle.
/// Regions are bisected along the axis whose Gauss/Kronrod discrepancy is
/// larger. Integrable corner and edge singularities are fine as long as
/// the integrand is finite at interior nodes.
QuadratureResult integrate_2d(const Integrand2d& f, const Rect& box, const QuadratureOptions& opt = {});

struct LatticeRuleOptions {
    int fibonacci_index = 30;   // N = F_index points per shift
    int shifts = 16;            // independent random shifts
    std::uint64_t seed = 0x5eed;
    bool periodize = true;      // Sidi sin^2 transform on both axes
};

/// Randomly shifted Fibonacci lattice rule on [0, 1]^2. The error estimate
/// is the standard error over shifts.
QuadratureResult lattice_rule_2d(const Integrand2d& f, const LatticeRuleOptions& opt = {});

}  // namespace silt
