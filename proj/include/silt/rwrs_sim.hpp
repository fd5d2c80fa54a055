#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "silt/increment_laws.hpp"
#include "silt/path_engine.hpp"

namespace silt {

enum class SceneryKind { rademacher, gaussian, custom_iid };

std::string_view to_string(SceneryKind kind);
SceneryKind parse_scenery_kind(std::string_view name);

struct SceneryAtom {
    double value = 0.0;
    double p = 0.0;
};

/// iid scenery whose value at a site is a pure function of (seed, site), so
/// sites can be queried in any order.
class Scenery {
public:
    static Scenery rademacher(std::uint64_t seed);
    static Scenery gaussian(std::uint64_t seed);
    /// Discrete law with mean zero and positive variance.
    static Scenery custom(std::vector<SceneryAtom> atoms, std::uint64_t seed);

    SceneryKind kind() const noexcept { return kind_; }
    double sigma() const noexcept { return sigma_; }
    std::uint64_t seed() const noexcept { return seed_; }
    double at(std::uint64_t site_key) const;
    Scenery reseeded(std::uint64_t seed) const;

private:
    SceneryKind kind_ = SceneryKind::rademacher;
    double sigma_ = 1.0;
    std::uint64_t seed_ = 0;
    std::vector<SceneryAtom> atoms_;
    std::vector<double> cumulative_;
};

struct RwrsPath {
    std::int64_t n = 0;
    std::vector<double> t_grid;
    std::vector<double> values;
    std::uint64_t walk_seed = 0;
    std::uint64_t scenery_seed = 0;
};

/// Y_n(t) = sqrt(pi g) sum_{i <= [nt]} xi(S_i) / (sigma sqrt(2 n log n)).
RwrsPath rwrs_path(const WalkPath& path, const Scenery& scenery, const std::vector<double>& t_grid, double gamma);

/// s_n^2(t) = pi g V_[nt] / (2 n log n), the conditional variance of Y_n(t).
std::vector<double> quenched_variance(const WalkPath& path, double gamma, const std::vector<double>& t_grid);

struct CltReport {
    std::int64_t n = 0;
    std::int64_t reps = 0;
    std::uint64_t walk_seed = 0;
    double s_n2 = 0.0;
    double ks = 0.0;                 // empirical, studentized
    double ks_band = 0.0;            // 5% critical value at this rep count
    double exact_ks = -1.0;          // rademacher only: exact quenched KS of Y/s_n vs N(0,1)
    double mean_Y = 0.0, mean_Y_ci = 0.0;
    double var_Y = 0.0, var_Y_ci = 0.0;
    std::vector<double> studentized;
};

CltReport quenched_clt_test(const IncrementLaw& law, std::int64_t n, std::int64_t scenery_reps,
                            std::uint64_t walk_seed, std::uint64_t scenery_seed_base, SceneryKind kind,
                            unsigned workers = 1);

/// KS distance between the exact law of sum_x N(x) eps(x) / sqrt(V) with
/// iid signs eps and the standard normal.
double rademacher_exact_ks(const OccupationMeasure& occ);

struct FddReport {
    std::int64_t n = 0;
    std::int64_t reps = 0;
    std::vector<double> t_grid;
    std::vector<std::vector<double>> empirical;
    std::vector<std::vector<double>> empirical_se;
    std::vector<std::vector<double>> quenched;
    std::vector<std::vector<double>> brownian;
    /// Covariance of Y(t1) and Y(t2) - Y(t1) from occupation increments, and
    /// the same quantity from cross_intersections(path, t1, t2).
    double increment_quenched = 0.0;
    double increment_cross = 0.0;
    double max_z = 0.0;  // max |empirical - quenched| / se
};

FddReport fdd_covariance_check(const IncrementLaw& law, std::int64_t n, const std::vector<double>& t_grid,
                               std::int64_t scenery_reps, std::uint64_t walk_seed, std::uint64_t scenery_seed_base,
                               SceneryKind kind, unsigned workers = 1);

}  // namespace silt
