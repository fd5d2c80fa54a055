#include "silt/rwrs_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

#include "silt/fourier.hpp"
#include "silt/parallel.hpp"
#include "silt/stats.hpp"

namespace silt {

namespace {

double normalizer(std::int64_t n, double gamma) {
    if (n < 2) throw std::invalid_argument("the scenery normalization needs n >= 2");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    return std::sqrt(std::numbers::pi * gamma / (2.0 * static_cast<double>(n) * std::log(static_cast<double>(n))));
}

double law_gamma(const IncrementLaw& law) {
    const auto g = law.gamma();
    if (!g) throw std::invalid_argument(fmt::format("law '{}' has no gamma; scenery sums need a Cauchy-domain law", law.name()));
    return *g;
}

std::int64_t grid_index(double t, std::int64_t n) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("time grid points must lie in [0, 1]");
    return static_cast<std::int64_t>(std::floor(t * static_cast<double>(n)));
}

}  // namespace

std::string_view to_string(SceneryKind kind) {
    switch (kind) {
        case SceneryKind::rademacher: return "rademacher";
        case SceneryKind::gaussian: return "gaussian";
        case SceneryKind::custom_iid: return "custom";
    }
    return "?";
}

SceneryKind parse_scenery_kind(std::string_view name) {
    if (name == "rademacher") return SceneryKind::rademacher;
    if (name == "gaussian") return SceneryKind::gaussian;
    if (name == "custom") return SceneryKind::custom_iid;
    throw std::invalid_argument(fmt::format("unknown scenery '{}'", name));
}

Scenery Scenery::rademacher(std::uint64_t seed) {
    Scenery s;
    s.kind_ = SceneryKind::rademacher;
    s.seed_ = seed;
    return s;
}

Scenery Scenery::gaussian(std::uint64_t seed) {
    Scenery s;
    s.kind_ = SceneryKind::gaussian;
    s.seed_ = seed;
    return s;
}

Scenery Scenery::custom(std::vector<SceneryAtom> atoms, std::uint64_t seed) {
    if (atoms.empty()) throw std::invalid_argument("custom scenery needs at least one atom");
    double total = 0.0, mean = 0.0, second = 0.0;
    for (const SceneryAtom& a : atoms) {
        if (!(a.p >= 0.0) || !std::isfinite(a.value)) throw std::invalid_argument("bad custom scenery atom");
        total += a.p;
        mean += a.p * a.value;
        second += a.p * a.value * a.value;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("custom scenery masses must sum to 1");
    if (std::abs(mean) > 1e-12) throw std::invalid_argument("custom scenery must have mean zero");
    const double var = second - mean * mean;
    if (!(var > 1e-24)) throw std::invalid_argument("custom scenery must have positive variance");
    Scenery s;
    s.kind_ = SceneryKind::custom_iid;
    s.seed_ = seed;
    s.sigma_ = std::sqrt(var);
    s.atoms_ = std::move(atoms);
    double c = 0.0;
    for (const SceneryAtom& a : s.atoms_) s.cumulative_.push_back(c += a.p);
    return s;
}

Scenery Scenery::reseeded(std::uint64_t seed) const {
    Scenery s = *this;
    s.seed_ = seed;
    return s;
}

double Scenery::at(std::uint64_t site_key) const {
    const std::uint64_t h = mix64(seed_ ^ mix64(site_key));
    switch (kind_) {
        case SceneryKind::rademacher: return (h >> 63) ? 1.0 : -1.0;
        case SceneryKind::gaussian: {
            const double u1 = bits_to_unit(h);
            const double u2 = bits_to_unit(mix64(h));
            return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        }
        case SceneryKind::custom_iid: {
            const double u = bits_to_unit(h) * cumulative_.back();
            const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
            return atoms_[std::min<std::size_t>(it - cumulative_.begin(), atoms_.size() - 1)].value;
        }
    }
    return 0.0;
}

RwrsPath rwrs_path(const WalkPath& path, const Scenery& scenery, const std::vector<double>& t_grid, double gamma) {
    const auto n = static_cast<std::int64_t>(path.steps());
    const double scale = normalizer(n, gamma) / scenery.sigma();
    RwrsPath out{n, t_grid, {}, path.seed, scenery.seed()};
    std::vector<std::int64_t> idx;
    for (double t : t_grid) idx.push_back(grid_index(t, n));
    const std::int64_t last = idx.empty() ? 0 : *std::max_element(idx.begin(), idx.end());
    std::vector<double> partial(static_cast<std::size_t>(last) + 1);
    double sum = 0.0;
    for (std::int64_t i = 0; i <= last; ++i) {
        sum += scenery.at(pack_site(path.sites[i], path.dimension));
        partial[i] = sum;
    }
    for (std::int64_t i : idx) out.values.push_back(scale * partial[i]);
    return out;
}

std::vector<double> quenched_variance(const WalkPath& path, double gamma, const std::vector<double>& t_grid) {
    const auto n = static_cast<std::int64_t>(path.steps());
    const double c = normalizer(n, gamma);
    const std::vector<std::uint64_t> curve = self_intersection_curve(path);
    std::vector<double> out;
    for (double t : t_grid) out.push_back(c * c * static_cast<double>(curve[grid_index(t, n)]));
    return out;
}

double rademacher_exact_ks(const OccupationMeasure& occ) {
    std::map<std::uint64_t, std::uint64_t> multiplicity;  // local time -> number of sites
    std::uint64_t v = 0, total = 0;
    occ.counts.for_each([&](std::uint64_t, std::uint64_t c) {
        ++multiplicity[c];
        v += c * c;
        total += c;
    });
    // support of the sum is {-total, ..., total} with the parity of total
    std::size_t points = 256;
    while (points < 2 * total + 2) points <<= 1;
    std::vector<double> spectrum(points / 2 + 1);
    for (std::size_t j = 0; j < spectrum.size(); ++j) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(points);
        double log_abs = 0.0;
        bool negative = false;
        bool zero = false;
        for (const auto& [w, m] : multiplicity) {
            const double c = std::cos(static_cast<double>(w) * theta);
            if (c == 0.0) {
                zero = true;
                break;
            }
            log_abs += static_cast<double>(m) * std::log(std::abs(c));
            if (c < 0.0 && (m & 1U)) negative = !negative;
        }
        spectrum[j] = zero ? 0.0 : (negative ? -1.0 : 1.0) * std::exp(log_abs);
    }
    EvenSpectrumInverter inverter(points);
    const std::vector<double> pmf = inverter.invert(spectrum);
    const double sd = std::sqrt(static_cast<double>(v));
    const auto t = static_cast<std::int64_t>(total);
    double cdf = 0.0, ks = 0.0;
    for (std::int64_t z = -t; z <= t; z += 2) {
        const std::size_t idx = static_cast<std::size_t>((z % static_cast<std::int64_t>(points) + static_cast<std::int64_t>(points)) %
                                                         static_cast<std::int64_t>(points));
        const double phi = normal_cdf(static_cast<double>(z) / sd);
        ks = std::max(ks, std::abs(cdf - phi));
        cdf += std::max(pmf[idx], 0.0);
        ks = std::max(ks, std::abs(cdf - phi));
    }
    return ks;
}

CltReport quenched_clt_test(const IncrementLaw& law, std::int64_t n, std::int64_t scenery_reps,
                            std::uint64_t walk_seed, std::uint64_t scenery_seed_base, SceneryKind kind,
                            unsigned workers) {
    const double gamma = law_gamma(law);
    if (n < 2) throw std::invalid_argument("n must be at least 2");
    if (scenery_reps < 2) throw std::invalid_argument("at least two sceneries are needed");
    if (kind == SceneryKind::custom_iid) throw std::invalid_argument("quenched_clt_test takes a built-in scenery");
    const WalkPath path = simulate_path(law, static_cast<std::size_t>(n), walk_seed);
    const OccupationMeasure occ = occupation(path);
    std::vector<std::pair<std::uint64_t, double>> sites;
    sites.reserve(occ.counts.size());
    for (const auto& e : occ.counts.sorted_entries()) sites.emplace_back(e.key, static_cast<double>(e.count));
    const double v = static_cast<double>(self_intersections(occ));
    const double c = normalizer(n, gamma);

    CltReport rep;
    rep.n = n;
    rep.reps = scenery_reps;
    rep.walk_seed = walk_seed;
    rep.s_n2 = c * c * v;
    std::vector<double> y(static_cast<std::size_t>(scenery_reps));
    const Scenery base = kind == SceneryKind::gaussian ? Scenery::gaussian(0) : Scenery::rademacher(0);
    parallel_for(y.size(), workers, [&](std::size_t r) {
        const Scenery sc = base.reseeded(derive_seed(scenery_seed_base, r));
        double sum = 0.0;
        for (const auto& [key, count] : sites) sum += count * sc.at(key);
        y[r] = c * sum;  // sigma = 1 for the built-ins
    });
    RunningMoments acc;
    const double s_n = std::sqrt(rep.s_n2);
    rep.studentized.reserve(y.size());
    for (double val : y) {
        acc.add(val);
        rep.studentized.push_back(val / s_n);
    }
    rep.mean_Y = acc.mean();
    rep.mean_Y_ci = acc.mean_halfwidth();
    rep.var_Y = acc.variance();
    rep.var_Y_ci = acc.variance_halfwidth();
    rep.ks = ks_distance_normal(rep.studentized);
    rep.ks_band = ks_critical_5pct(y.size());
    if (kind == SceneryKind::rademacher) rep.exact_ks = rademacher_exact_ks(occ);
    return rep;
}

FddReport fdd_covariance_check(const IncrementLaw& law, std::int64_t n, const std::vector<double>& t_grid,
                               std::int64_t scenery_reps, std::uint64_t walk_seed, std::uint64_t scenery_seed_base,
                               SceneryKind kind, unsigned workers) {
    const double gamma = law_gamma(law);
    if (t_grid.empty() || t_grid.size() > 5) throw std::invalid_argument("t grid must hold 1 to 5 points");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()) || t_grid.front() <= 0.0 ||
        std::adjacent_find(t_grid.begin(), t_grid.end()) != t_grid.end())
        throw std::invalid_argument("t grid must be positive and strictly increasing");
    if (scenery_reps < 4) throw std::invalid_argument("at least four sceneries are needed");
    if (kind == SceneryKind::custom_iid) throw std::invalid_argument("fdd_covariance_check takes a built-in scenery");
    const WalkPath path = simulate_path(law, static_cast<std::size_t>(n), walk_seed);
    const double c = normalizer(n, gamma);
    const std::size_t m = t_grid.size();
    std::vector<std::int64_t> idx;
    for (double t : t_grid) idx.push_back(grid_index(t, n));

    // per-site local times at each grid time
    std::unordered_map<std::uint64_t, std::size_t> slot_of;
    std::vector<std::uint64_t> keys;
    std::vector<std::vector<double>> local;  // [site][grid]
    std::size_t g = 0;
    for (std::int64_t i = 0; i <= idx.back(); ++i) {
        const std::uint64_t key = pack_site(path.sites[i], path.dimension);
        const auto [it, fresh] = slot_of.try_emplace(key, keys.size());
        if (fresh) {
            keys.push_back(key);
            local.emplace_back(m, 0.0);
        }
        const std::size_t slot = it->second;
        while (g < m && idx[g] < i) ++g;
        for (std::size_t k = g; k < m; ++k) local[slot][k] += 1.0;
    }

    FddReport rep;
    rep.n = n;
    rep.reps = scenery_reps;
    rep.t_grid = t_grid;
    rep.quenched.assign(m, std::vector<double>(m, 0.0));
    rep.brownian.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            double s = 0.0;
            for (const auto& l : local) s += l[a] * l[b];
            rep.quenched[a][b] = c * c * s;
            rep.brownian[a][b] = std::min(t_grid[a], t_grid[b]);
        }
    if (m >= 2) {
        double s = 0.0;
        for (const auto& l : local) s += l[0] * (l[1] - l[0]);
        rep.increment_quenched = c * c * s;
        rep.increment_cross = c * c * static_cast<double>(cross_intersections(path, t_grid[0], t_grid[1]));
    }

    const Scenery base = kind == SceneryKind::gaussian ? Scenery::gaussian(0) : Scenery::rademacher(0);
    std::vector<std::vector<double>> samples(static_cast<std::size_t>(scenery_reps), std::vector<double>(m));
    parallel_for(samples.size(), workers, [&](std::size_t r) {
        const Scenery sc = base.reseeded(derive_seed(scenery_seed_base, r));
        std::vector<double> sum(m, 0.0);
        for (std::size_t s = 0; s < keys.size(); ++s) {
            const double xi = sc.at(keys[s]);
            for (std::size_t k = 0; k < m; ++k) sum[k] += local[s][k] * xi;
        }
        for (std::size_t k = 0; k < m; ++k) samples[r][k] = c * sum[k];
    });
    const double R = static_cast<double>(scenery_reps);
    std::vector<double> mean(m, 0.0);
    for (const auto& s : samples)
        for (std::size_t k = 0; k < m; ++k) mean[k] += s[k] / R;
    rep.empirical.assign(m, std::vector<double>(m, 0.0));
    rep.empirical_se.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
            RunningMoments prod;
            for (const auto& s : samples) prod.add((s[a] - mean[a]) * (s[b] - mean[b]));
            rep.empirical[a][b] = prod.mean() * R / (R - 1.0);
            rep.empirical_se[a][b] = std::sqrt(prod.variance() / R);
            if (rep.empirical_se[a][b] > 0.0)
                rep.max_z = std::max(rep.max_z, std::abs(rep.empirical[a][b] - rep.quenched[a][b]) / rep.empirical_se[a][b]);
        }
    return rep;
}

}  // namespace silt
