#include "silt/path_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace silt {

void OccupationMap::rehash(std::size_t capacity) {
    std::vector<Slot> old = std::move(slots_);
    slots_.assign(capacity, Slot{});
    size_ = 0;
    for (const Slot& slot : old) {
        if (!slot.used) continue;
        Slot& target = find_slot(slot.key);
        target = slot;
        ++size_;
    }
}

std::vector<OccupationMap::Entry> OccupationMap::sorted_entries() const {
    std::vector<Entry> out;
    out.reserve(size_);
    for_each([&](std::uint64_t key, std::uint64_t count) { out.push_back({key, count}); });
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.key < b.key; });
    return out;
}

WalkPath make_path(int dimension, std::vector<Site> sites) {
    if (sites.empty() || sites.front() != Site{}) throw std::invalid_argument("a path must start at the origin");
    if (dimension == 1)
        for (const auto& s : sites)
            if (s.y != 0) throw std::invalid_argument("two-dimensional site in a 1-d path");
    return WalkPath{dimension, 0, std::move(sites)};
}

WalkPath simulate_path(const IncrementLaw& law, std::size_t n, std::uint64_t seed) {
    WalkPath path{law.dimension(), seed, {}};
    path.sites.reserve(n + 1);
    path.sites.push_back(Site{});
    Engine rng = make_engine(seed);
    Site s{};
    for (std::size_t k = 0; k < n; ++k) {
        s = s + law.sample(rng);
        path.sites.push_back(s);
    }
    return path;
}

OccupationMeasure occupation(const WalkPath& path) {
    return occupation(path, path.steps());
}

OccupationMeasure occupation(const WalkPath& path, std::size_t last) {
    if (last >= path.sites.size()) throw std::out_of_range("occupation: prefix beyond the path");
    OccupationMeasure occ{path.dimension, OccupationMap(std::min<std::size_t>(last + 1, 1 << 20)), last + 1};
    for (std::size_t i = 0; i <= last; ++i) occ.counts.increment(pack_site(path.sites[i], path.dimension));
    return occ;
}

std::uint64_t self_intersections(const OccupationMeasure& occ) {
    std::uint64_t v = 0;
    occ.counts.for_each([&](std::uint64_t, std::uint64_t c) { v += c * c; });
    return v;
}

std::uint64_t self_intersections(const WalkPath& path) { return self_intersections(occupation(path)); }

std::uint64_t self_intersections_bruteforce(const WalkPath& path) {
    if (path.steps() > 10'000) throw std::invalid_argument("brute-force self-intersections capped at n = 10^4");
    std::uint64_t v = 0;
    for (const Site& a : path.sites)
        for (const Site& b : path.sites) v += (a == b) ? 1 : 0;
    return v;
}

std::vector<std::uint64_t> self_intersection_curve(const WalkPath& path) {
    std::vector<std::uint64_t> curve;
    curve.reserve(path.sites.size());
    OccupationMap counts(std::min<std::size_t>(path.sites.size(), 1 << 20));
    std::uint64_t v = 0;
    for (const Site& s : path.sites) {
        const std::uint64_t before = counts.increment(pack_site(s, path.dimension));
        v += 1 + 2 * before;
        curve.push_back(v);
    }
    return curve;
}

std::uint64_t max_local_time(const WalkPath& path) {
    std::uint64_t best = 0;
    occupation(path).counts.for_each([&](std::uint64_t, std::uint64_t c) { best = std::max(best, c); });
    return best;
}

std::uint64_t cross_intersections(const WalkPath& path, double a, double b) {
    if (!(a > 0.0 && a < b && b <= 1.0)) throw std::invalid_argument("cross_intersections: need 0 < a < b <= 1");
    const double n = static_cast<double>(path.steps());
    const auto early = static_cast<std::size_t>(std::floor(a * n));
    const auto late = static_cast<std::size_t>(std::floor(b * n));
    const OccupationMeasure first = occupation(path, early);
    std::uint64_t total = 0;
    for (std::size_t i = early + 1; i <= late; ++i) total += first.at(path.sites[i]);
    return total;
}

StreamedWalk simulate_streamed(const IncrementLaw& law, std::size_t n, std::uint64_t seed) {
    Engine rng = make_engine(seed);
    OccupationMap counts(std::min<std::size_t>(n + 1, 1 << 20));
    const int dim = law.dimension();
    StreamedWalk out;
    Site s{};
    auto visit = [&] {
        const std::uint64_t before = counts.increment(pack_site(s, dim));
        out.self_intersections += 1 + 2 * before;
        out.max_local_time = std::max(out.max_local_time, before + 1);
    };
    visit();
    for (std::size_t k = 0; k < n; ++k) {
        s = s + law.sample(rng);
        visit();
    }
    return out;
}

}  // namespace silt
