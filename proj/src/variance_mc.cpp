#include "silt/variance_mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "silt/exact_moments.hpp"
#include "silt/parallel.hpp"
#include "silt/path_engine.hpp"
#include "silt/quadratures.hpp"
#include "silt/stats.hpp"

namespace silt {

namespace {

// V_n at each checkpoint (ascending) of one walk.
std::vector<std::uint64_t> checkpoint_intersections(const IncrementLaw& law, const std::vector<std::int64_t>& checkpoints,
                                                    std::uint64_t seed) {
    Engine rng = make_engine(seed);
    const std::int64_t n = checkpoints.back();
    OccupationMap counts(static_cast<std::size_t>(std::min<std::int64_t>(n + 1, 1 << 20)));
    const int dim = law.dimension();
    std::vector<std::uint64_t> out;
    out.reserve(checkpoints.size());
    std::uint64_t v = 1;
    counts.increment(pack_site({}, dim));
    Site s{};
    std::size_t next = 0;
    while (next < checkpoints.size() && checkpoints[next] == 0) {
        out.push_back(v);
        ++next;
    }
    for (std::int64_t k = 1; k <= n; ++k) {
        s = s + law.sample(rng);
        v += 1 + 2 * counts.increment(pack_site(s, dim));
        while (next < checkpoints.size() && checkpoints[next] == k) {
            out.push_back(v);
            ++next;
        }
    }
    return out;
}

void check_reps(std::int64_t reps) {
    if (reps < 2) throw std::invalid_argument("at least two replicates are needed");
}

}  // namespace

McSummary mc_moments(const IncrementLaw& law, std::int64_t n, std::int64_t reps, std::uint64_t seed_base,
                     unsigned workers) {
    const auto rows = variance_trend(law, {n}, reps, seed_base, workers);
    return rows.front().summary;
}

std::vector<TrendRow> variance_trend(const IncrementLaw& law, const std::vector<std::int64_t>& n_list,
                                     std::int64_t reps, std::uint64_t seed_base, unsigned workers) {
    check_reps(reps);
    if (n_list.empty()) return {};
    if (n_list.front() < 0 || !std::is_sorted(n_list.begin(), n_list.end()) ||
        std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end())
        throw std::invalid_argument("n list must be non-negative and strictly increasing");
    std::vector<std::vector<std::uint64_t>> values(static_cast<std::size_t>(reps));
    parallel_for(values.size(), workers, [&](std::size_t r) {
        values[r] = checkpoint_intersections(law, n_list, derive_seed(seed_base, r));
    });
    std::optional<double> target;
    if ((law.dimension() == 1 && law.gamma()) || (law.dimension() == 2 && law.covariance()))
        target = theorem1_constant(law);
    std::vector<TrendRow> out;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        RunningMoments acc;
        for (const auto& v : values) acc.add(static_cast<double>(v[i]));
        TrendRow row;
        row.summary = {n_list[i], reps, acc.mean(), acc.variance(), acc.mean_halfwidth(), acc.variance_halfwidth(),
                       seed_base};
        const double n2 = n_list[i] == 0 ? 1.0 : static_cast<double>(n_list[i]) * static_cast<double>(n_list[i]);
        row.ratio = row.summary.var_Vn / n2;
        row.ratio_ci = row.summary.ci_var / n2;
        row.target = target;
        out.push_back(row);
    }
    return out;
}

std::vector<ExpectationRow> expectation_trend(const IncrementLaw& law, const std::vector<std::int64_t>& n_list) {
    if (law.dimension() != 1 || !law.gamma()) throw std::invalid_argument("expectation trend needs a 1-d law with gamma");
    if (n_list.empty()) return {};
    const std::int64_t n_max = *std::max_element(n_list.begin(), n_list.end());
    if (*std::min_element(n_list.begin(), n_list.end()) < 0) throw std::invalid_argument("n must be non-negative");
    if (n_max > 50'000'000) throw std::invalid_argument("n too large for the exact expectation");
    const std::vector<double> origin = return_probabilities(law, static_cast<int>(n_max));
    const double target = 2.0 / (std::numbers::pi * *law.gamma());
    std::vector<ExpectationRow> out;
    for (std::int64_t n : n_list) {
        const double ev = expected_Vn_from(origin, n);
        const double ratio = n < 2 ? std::numeric_limits<double>::quiet_NaN()
                                   : ev / (static_cast<double>(n) * std::log(static_cast<double>(n)));
        out.push_back({n, ev, ratio, target});
    }
    return out;
}

Concentration vn_concentration(const IncrementLaw& law, std::int64_t n, std::int64_t reps, std::uint64_t seed_base,
                               unsigned workers) {
    check_reps(reps);
    if (law.dimension() != 1) throw std::invalid_argument("V_n concentration is defined for 1-d laws");
    if (n < 0) throw std::invalid_argument("n must be non-negative");
    Concentration c;
    c.n = n;
    c.reps = reps;
    c.expected_Vn = expected_Vn(law, n);
    std::vector<double> ratios(static_cast<std::size_t>(reps));
    parallel_for(ratios.size(), workers, [&](std::size_t r) {
        const StreamedWalk w = simulate_streamed(law, static_cast<std::size_t>(n), derive_seed(seed_base, r));
        ratios[r] = static_cast<double>(w.self_intersections) / c.expected_Vn;
    });
    RunningMoments acc;
    std::int64_t out10 = 0, out25 = 0;
    for (double x : ratios) {
        acc.add(x);
        out10 += std::abs(x - 1.0) > 0.1;
        out25 += std::abs(x - 1.0) > 0.25;
    }
    c.outside_10 = static_cast<double>(out10) / static_cast<double>(reps);
    c.outside_25 = static_cast<double>(out25) / static_cast<double>(reps);
    c.mean_ratio = acc.mean();
    c.mean_ratio_ci = acc.mean_halfwidth();
    std::sort(ratios.begin(), ratios.end());
    for (double p : {0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99}) c.quantiles.emplace_back(p, quantile_sorted(ratios, p));
    return c;
}

}  // namespace silt
