#include "silt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace silt {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void RunningMoments::add(double x) {
    const std::uint64_t n1 = n_;
    ++n_;
    const double n = static_cast<double>(n_);
    const double delta = x - mean_;
    const double dn = delta / n;
    const double dn2 = dn * dn;
    const double term = delta * dn * static_cast<double>(n1);
    mean_ += dn;
    m4_ += term * dn2 * (n * n - 3 * n + 3) + 6 * dn2 * m2_ - 4 * dn * m3_;
    m3_ += term * dn * (n - 2) - 3 * dn * m2_;
    m2_ += term;
}

double RunningMoments::variance() const noexcept { return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1); }

double RunningMoments::mean_halfwidth() const noexcept {
    return n_ < 2 ? 0.0 : 1.96 * std::sqrt(variance() / static_cast<double>(n_));
}

double RunningMoments::variance_halfwidth() const noexcept {
    if (n_ < 4) return 0.0;
    const double n = static_cast<double>(n_);
    const double s2 = variance();
    const double mu4 = m4_ / n;
    const double v = (mu4 - s2 * s2 * (n - 3) / (n - 1)) / n;
    return 1.96 * std::sqrt(std::max(v, 0.0));
}

double ks_distance_normal(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("KS distance of an empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = normal_cdf(samples[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_critical_5pct(std::size_t n) {
    const double s = std::sqrt(static_cast<double>(n));
    return 1.358 / (s + 0.12 + 0.11 / s);
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace silt
