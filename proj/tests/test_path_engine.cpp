#include <doctest.h>

#include <algorithm>
#include <map>

#include "silt/path_engine.hpp"

using namespace silt;

namespace {
WalkPath line(std::vector<std::int64_t> xs) {
    std::vector<Site> sites;
    for (auto x : xs) sites.push_back({x, 0});
    return make_path(1, std::move(sites));
}
WalkPath constant_path(std::size_t n) { return line(std::vector<std::int64_t>(n + 1, 0)); }
WalkPath distinct_path(std::size_t n) {
    std::vector<std::int64_t> xs(n + 1);
    for (std::size_t i = 0; i <= n; ++i) xs[i] = std::int64_t(i);
    return line(xs);
}
}  // namespace

TEST_SUITE("path_engine") {
    TEST_CASE("simulate_path basics") {
        const IncrementLaw lazy = IncrementLaw::lazy_srw_2d();
        const WalkPath empty = simulate_path(lazy, 0, 1);
        REQUIRE(empty.sites.size() == 1);
        CHECK(empty.sites[0] == Site{0, 0});

        const WalkPath big = simulate_path(lazy, 1'000'000, 5);
        CHECK(big.steps() == 1'000'000);
        for (std::size_t i = 1; i < big.sites.size(); ++i) {
            const Site d = big.sites[i] - big.sites[i - 1];
            REQUIRE(std::abs(d.x) + std::abs(d.y) <= 1);
        }
        const auto extent = std::max_element(big.sites.begin(), big.sites.end(), [](Site a, Site b) {
            return std::max(std::abs(a.x), std::abs(a.y)) < std::max(std::abs(b.x), std::abs(b.y));
        });
        CHECK(std::max(std::abs(extent->x), std::abs(extent->y)) <= 1'000'000);

        const IncrementLaw z = IncrementLaw::zipf1d();
        const WalkPath a = simulate_path(z, 5000, 42), b = simulate_path(z, 5000, 42);
        CHECK(a.sites == b.sites);
        CHECK(simulate_path(z, 5000, 43).sites != a.sites);
        CHECK_THROWS(make_path(1, {{1, 0}, {2, 0}}));
    }

    TEST_CASE("occupation examples") {
        const OccupationMeasure occ = occupation(line({0, 1, 0}));
        CHECK(occ.at({0, 0}) == 2);
        CHECK(occ.at({1, 0}) == 1);
        CHECK(occ.at({2, 0}) == 0);
        CHECK(occ.counts.size() == 2);

        const OccupationMeasure d = occupation(distinct_path(20));
        d.counts.for_each([](std::uint64_t, std::uint64_t c) { CHECK(c == 1); });

        const WalkPath w = simulate_path(IncrementLaw::lazy_srw_2d(), 3000, 11);
        const OccupationMeasure o = occupation(w);
        std::uint64_t total = 0;
        o.counts.for_each([&](std::uint64_t, std::uint64_t c) { total += c; });
        CHECK(total == 3001);
        CHECK(o.total == 3001);
        CHECK(occupation(w, 100).total == 101);
    }

    TEST_CASE("self-intersection examples") {
        CHECK(self_intersections(constant_path(4)) == 25);
        CHECK(self_intersections(distinct_path(4)) == 5);
        CHECK(self_intersections(line({0, 1, 0})) == 5);
        CHECK(self_intersections_bruteforce(constant_path(4)) == 25);
        CHECK(self_intersections_bruteforce(distinct_path(4)) == 5);
        CHECK(self_intersections_bruteforce(line({0, 1, 0})) == 5);
    }

    TEST_CASE("fast and brute-force counts agree on random paths") {
        const IncrementLaw laws[] = {IncrementLaw::lazy_srw_2d(), IncrementLaw::zipf1d(),
                                     IncrementLaw::truncated_zipf1d(2)};
        for (const auto& law : laws)
            for (std::uint64_t seed = 0; seed < 20; ++seed) {
                const WalkPath p = simulate_path(law, 800, seed);
                const std::uint64_t v = self_intersections(p);
                CHECK(v == self_intersections_bruteforce(p));
                const auto curve = self_intersection_curve(p);
                CHECK(curve.front() == 1);
                CHECK(curve.back() == v);
                CHECK(curve[400] == self_intersections(occupation(p, 400)));
                CHECK(simulate_streamed(law, 800, seed).self_intersections == v);
                CHECK(simulate_streamed(law, 800, seed).max_local_time == max_local_time(p));
            }
    }

    TEST_CASE("max local time") {
        CHECK(max_local_time(constant_path(9)) == 10);
        CHECK(max_local_time(distinct_path(9)) == 1);
        CHECK(max_local_time(line({0, 1, 0, 1, 0})) == 3);
    }

    TEST_CASE("cross intersections") {
        CHECK(cross_intersections(distinct_path(10), 0.5, 1.0) == 0);
        CHECK(cross_intersections(constant_path(10), 0.5, 1.0) == 30);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const WalkPath p = simulate_path(IncrementLaw::lazy_srw_2d(), 300, seed);
            for (auto [a, b] : {std::pair{0.25, 0.5}, std::pair{0.5, 1.0}, std::pair{0.1, 0.9}}) {
                const auto an = static_cast<std::size_t>(a * 300), bn = static_cast<std::size_t>(b * 300);
                std::uint64_t brute = 0;
                for (std::size_t i = an + 1; i <= bn; ++i)
                    for (std::size_t j = 0; j <= an; ++j) brute += p.sites[i] == p.sites[j];
                CHECK(cross_intersections(p, a, b) == brute);
            }
        }
        CHECK_THROWS(cross_intersections(constant_path(10), 0.6, 0.5));
    }
}
