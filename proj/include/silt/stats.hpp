#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace silt {

double normal_cdf(double x);

/// One-pass mean, variance and fourth central moment (Welford/Pebay updates).
class RunningMoments {
public:
    void add(double x);

    std::uint64_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    /// Unbiased sample variance.
    double variance() const noexcept;
    /// 95% normal-approximation half-width for the mean.
    double mean_halfwidth() const noexcept;
    /// 95% half-width for the sample variance, from the estimated fourth moment.
    double variance_halfwidth() const noexcept;

private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

/// sup_x |F_n(x) - Phi(x)| for the empirical law of the samples.
double ks_distance_normal(std::vector<double> samples);

/// 5% critical value of the one-sample KS statistic (Stephens' approximation).
double ks_critical_5pct(std::size_t n);

/// Linear-interpolation quantile of sorted data.
double quantile_sorted(std::span<const double> sorted, double p);

}  // namespace silt
