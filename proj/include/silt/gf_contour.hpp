#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "silt/rng.hpp"

namespace silt {

using Complex = std::complex<double>;

struct SeriesSpec {
    std::string name;
    std::function<Complex(Complex)> evaluator;
};

/// Built-in generating functions: inv1mz2, inv1mz3, log_over_1mz2, exp,
/// poly7, renewal_a:<law>, renewal_b:<law>, renewal_a_rem:<law>,
/// renewal_b_rem:<law>. A path to a JSON array of coefficients gives the
/// corresponding polynomial.
SeriesSpec builtin_series(std::string_view name);

/// Trapezoidal Cauchy integral on |z| = R with M points,
/// R = 1 - 1/n (1/2 for n = 1).
double cauchy_coefficient(const SeriesSpec& series, int n, int points, unsigned workers = 1);
Complex cauchy_coefficient_complex(const SeriesSpec& series, int n, int points, unsigned workers = 1);

double contour_radius(int n);

/// 4 pi^{-1/2} Gamma((g-1)/2) / Gamma(g/2), defined for g > 1.
double darboux_constant(double gamma);

enum class SlowlyVarying { constant, log, log_squared };

double slowly_varying(SlowlyVarying form, double x);
std::string_view to_string(SlowlyVarying form);
SlowlyVarying parse_slowly_varying(std::string_view name);

struct DarbouxTerm {
    double A = 0.0;
    double gamma = 2.0;
    SlowlyVarying l = SlowlyVarying::constant;
};

struct DarbouxHypothesis {
    double K = 0.0;
    double alpha = 0.5;
    std::vector<DarbouxTerm> terms;
};

/// 4K + sum_m A_m C(g_m) n^{g_m - 1} l_m(n).
double darboux_bound(const DarbouxHypothesis& hyp, int n);

struct FitOptions {
    double alpha = 0.5;
    int radial_levels = 48;    // radii 1 - 2^{-j/4}
    int angles = 2048;
};

/// Estimates K over Re z <= alpha and a common multiplier for the term
/// shapes over Re z > alpha by maximization on a polar grid inside the
/// disk. The A fields of `shape` act as relative weights. With no terms, K
/// bounds the whole grid and alpha is set to 1.
DarbouxHypothesis fit_hypothesis(const SeriesSpec& series, const std::vector<DarbouxTerm>& shape,
                                 const FitOptions& opt = {});

struct DarbouxRow {
    int n = 0;
    double coefficient = 0.0;
    double bound = 0.0;
    double aliasing = 0.0;  // |c_M - c_2M|
    bool holds = false;
    double margin() const { return bound - std::abs(coefficient); }
};

struct DarbouxReport {
    std::vector<DarbouxRow> rows;
    bool all_hold() const;
};

DarbouxReport verify_darboux(const SeriesSpec& series, const DarbouxHypothesis& hyp, const std::vector<int>& n_values,
                             int points_per_n = 8, unsigned workers = 1);

class RenewalLaw {
public:
    /// "geometric:p" (P(T = k) = p (1-p)^{k-1}, k >= 1) or "pmf:k=p,k=p,...".
    static RenewalLaw parse(std::string_view spec);
    static RenewalLaw geometric(double p);
    static RenewalLaw finite(std::vector<double> pmf);

    const std::string& name() const noexcept { return name_; }
    double mu() const noexcept { return mu_; }
    double pmf(std::int64_t k) const;
    Complex pgf(Complex lambda) const;
    std::int64_t sample(Engine& rng) const;
    bool is_geometric() const noexcept { return geometric_p_ > 0.0; }
    double geometric_p() const noexcept { return geometric_p_; }
    const std::vector<double>& table() const noexcept { return pmf_; }

private:
    std::string name_;
    double mu_ = 0.0;
    double geometric_p_ = 0.0;
    std::vector<double> pmf_;
    std::vector<double> cumulative_;
};

struct RenewalGF {
    Complex a;
    Complex b;
};

RenewalGF renewal_gf(const RenewalLaw& law, Complex lambda);

struct RenewalMoments {
    std::vector<double> first;   // E N_m, m = 0..n
    std::vector<double> second;  // E N_m^2
};

RenewalMoments renewal_moments_exact(const RenewalLaw& law, int n);

struct RenewalBoundFit {
    double delta = 0.5;
    SlowlyVarying l = SlowlyVarying::constant;
    double C = 0.0;
    double mu = 1.0;
    /// C n^{1-delta} l(n) plus rounding(n).
    double bound(int n) const;
    /// Recursive-summation error bound 4 eps n (n/mu + 1) for the computed E N_n.
    double rounding(int n) const;
};

/// Fits C in |E N_n - n/mu| <= C n^{1-delta} l(n) + rounding(n) on 1 <= n <= fit_max.
RenewalBoundFit fit_renewal_bound(const RenewalMoments& m, double mu, int fit_max, double delta,
                                  SlowlyVarying l = SlowlyVarying::constant);

struct LlnRow {
    std::int64_t n = 0;
    double max_deviation = 0.0;
    double mean_deviation = 0.0;
};

std::vector<LlnRow> renewal_lln_check(const RenewalLaw& law, const std::vector<std::int64_t>& n_list, int reps,
                                      std::uint64_t seed, unsigned workers = 1);

}  // namespace silt
