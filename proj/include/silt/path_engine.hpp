#pragma once

#include <cstdint>
#include <vector>

#include "silt/increment_laws.hpp"
#include "silt/lattice.hpp"

namespace silt {

/// A realised trajectory S_0 = 0, S_1, ..., S_n.
struct WalkPath {
    int dimension = 1;
    std::uint64_t seed = 0;
    std::vector<Site> sites;

    std::size_t steps() const noexcept { return sites.empty() ? 0 : sites.size() - 1; }
};

/// Builds a path from explicit sites (S_0 must be the origin).
WalkPath make_path(int dimension, std::vector<Site> sites);

WalkPath simulate_path(const IncrementLaw& law, std::size_t n, std::uint64_t seed);

/// Site -> number of visits N_n(x) among S_0..S_n.
struct OccupationMeasure {
    int dimension = 1;
    OccupationMap counts;
    std::uint64_t total = 0;  // n + 1

    std::uint64_t at(Site x) const { return counts.count(pack_site(x, dimension)); }
};

/// Occupation of the prefix S_0..S_{last}; last defaults to the whole path.
OccupationMeasure occupation(const WalkPath& path);
OccupationMeasure occupation(const WalkPath& path, std::size_t last);

/// V_n = sum_{i,j=0}^n 1{S_i = S_j} = sum_x N_n(x)^2, diagonal included.
std::uint64_t self_intersections(const WalkPath& path);
std::uint64_t self_intersections(const OccupationMeasure& occ);

/// The literal O(n^2) double sum; paths are capped at 10^4 steps.
std::uint64_t self_intersections_bruteforce(const WalkPath& path);

/// V_0, V_1, ..., V_n along the path via V_m = V_{m-1} + 1 + 2 N_{m-1}(S_m).
std::vector<std::uint64_t> self_intersection_curve(const WalkPath& path);

/// sup_x N_n(x).
std::uint64_t max_local_time(const WalkPath& path);

/// #{(i, j): j <= [an] < i <= [bn], S_i = S_j} for 0 < a < b <= 1.
std::uint64_t cross_intersections(const WalkPath& path, double a, double b);

/// Summary of one path computed in a single streaming pass without storing
/// the sites; identical to the path-based functions for the same seed.
struct StreamedWalk {
    std::uint64_t self_intersections = 0;
    std::uint64_t max_local_time = 0;
};

StreamedWalk simulate_streamed(const IncrementLaw& law, std::size_t n, std::uint64_t seed);

}  // namespace silt
