#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "silt/increment_laws.hpp"

namespace silt {

struct McSummary {
    std::int64_t n = 0;
    std::int64_t reps = 0;
    double mean_Vn = 0.0;
    double var_Vn = 0.0;
    double ci_mean = 0.0;  // 95% half-widths
    double ci_var = 0.0;
    std::uint64_t seed_base = 0;
};

/// Replicate r uses the walk seeded with derive_seed(seed_base, r).
McSummary mc_moments(const IncrementLaw& law, std::int64_t n, std::int64_t reps, std::uint64_t seed_base,
                     unsigned workers = 1);

struct TrendRow {
    McSummary summary;
    double ratio = 0.0;     // var / n^2
    double ratio_ci = 0.0;
    std::optional<double> target;
};

/// Each replicate walks once to max(n_list) and records V_n at every
/// checkpoint, so the rows share paths; the row for n equals
/// mc_moments(law, n, reps, seed_base) exactly.
std::vector<TrendRow> variance_trend(const IncrementLaw& law, const std::vector<std::int64_t>& n_list,
                                     std::int64_t reps, std::uint64_t seed_base, unsigned workers = 1);

struct ExpectationRow {
    std::int64_t n = 0;
    double expected_Vn = 0.0;
    double ratio = 0.0;  // E V_n / (n log n), NaN for n < 2
    double target = 0.0;
};

std::vector<ExpectationRow> expectation_trend(const IncrementLaw& law, const std::vector<std::int64_t>& n_list);

struct Concentration {
    std::int64_t n = 0;
    std::int64_t reps = 0;
    double expected_Vn = 0.0;
    std::vector<std::pair<double, double>> quantiles;  // (p, quantile of V_n / E V_n)
    double outside_10 = 0.0;  // fraction with |V_n / E V_n - 1| > 0.1
    double outside_25 = 0.0;
    double mean_ratio = 0.0;
    double mean_ratio_ci = 0.0;
};

Concentration vn_concentration(const IncrementLaw& law, std::int64_t n, std::int64_t reps, std::uint64_t seed_base,
                               unsigned workers = 1);

}  // namespace silt
