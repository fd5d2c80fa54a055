#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "silt/increment_laws.hpp"

using namespace silt;

namespace {
constexpr double kPi = std::numbers::pi;

// Partial sums of sum_k P(X = k) cos(kt), with the tail beyond K replaced by
// its integral approximation to keep the oracle independent of the closed form.
double zipf_series(double t, long K) {
    double s = 0.0;
    for (long k = K; k >= 1; --k) s += 2.0 * 3.0 / (kPi * kPi * double(k) * double(k)) * std::cos(k * t);
    return s;
}
}  // namespace

TEST_SUITE("increment_laws") {
    TEST_CASE("lazy walk table and covariance") {
        const IncrementLaw law = IncrementLaw::lazy_srw_2d();
        CHECK(law.dimension() == 2);
        CHECK(law.pmf({0, 0}) == 0.5);
        for (Site s : {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1}}) CHECK(law.pmf(s) == 0.125);
        // covariance from second moments of the table
        double xx = 0, xy = 0, yy = 0;
        for (const auto& e : law.support()) {
            xx += e.p * double(e.site.x * e.site.x);
            xy += e.p * double(e.site.x * e.site.y);
            yy += e.p * double(e.site.y * e.site.y);
        }
        REQUIRE(law.covariance());
        CHECK(law.covariance()->xx == doctest::Approx(xx));
        CHECK(law.covariance()->xy == doctest::Approx(xy));
        CHECK(law.covariance()->yy == doctest::Approx(yy));
        CHECK(law.covariance()->determinant() == doctest::Approx(1.0 / 16));
        CHECK(law.is_symmetric());
    }

    TEST_CASE("zipf law gamma and characteristic function") {
        const IncrementLaw law = IncrementLaw::zipf1d();
        REQUIRE(law.gamma());
        CHECK(*law.gamma() == doctest::Approx(3.0 / kPi).epsilon(1e-15));
        CHECK(std::abs(law.charfn(0.0) - 1.0) < 1e-15);
        CHECK(law.charfn(-kPi).real() == doctest::Approx(-0.5).epsilon(1e-14));
        // series oracle, truncation error at most 6/(pi^2 K)
        for (double t : {-kPi, -2.0, -0.3, 0.1, 1.0, 2.5}) {
            const double series = zipf_series(t, 2'000'000);
            CHECK(std::abs(law.charfn(t).real() - series) < 1e-6);
            CHECK(std::abs(law.charfn(t).imag()) < 1e-15);
        }
        CHECK_THROWS_AS(law.charfn(kPi), std::invalid_argument);
        CHECK_THROWS_AS(law.charfn(4.0), std::invalid_argument);
    }

    TEST_CASE("lazy walk characteristic function") {
        const IncrementLaw law = IncrementLaw::lazy_srw_2d();
        CHECK(std::abs(law.charfn(-kPi, -kPi)) < 1e-15);
        CHECK(std::abs(law.charfn(0, 0) - 1.0) < 1e-15);
        for (double a : {-3.0, -1.0, 0.4, 2.0})
            for (double b : {-2.5, 0.0, 1.5}) {
                const std::complex<double> f = law.charfn(a, b);
                CHECK(f.real() == doctest::Approx(0.5 + (std::cos(a) + std::cos(b)) / 4));
                CHECK(std::abs(f - std::conj(law.charfn(-a, -b))) < 1e-15);
                CHECK(std::abs(f) <= 1.0 + 1e-15);
            }
    }

    TEST_CASE("custom law validation") {
        CHECK_THROWS_AS(IncrementLaw::finite_custom(1, {{{1, 0}, 1.0}}), std::invalid_argument);
        CHECK_THROWS_AS(IncrementLaw::finite_custom(1, {{{1, 0}, 0.5}, {{-1, 0}, 0.5}}), std::invalid_argument);
        CHECK_THROWS_AS(IncrementLaw::finite_custom(1, {{{0, 0}, 1.2}, {{1, 0}, -0.2}}), std::invalid_argument);
        CHECK_THROWS_AS(IncrementLaw::finite_custom(1, {{{0, 0}, 0.5}, {{1, 0}, 0.4}}), std::invalid_argument);
        CHECK_THROWS_AS(IncrementLaw::finite_custom(1, {{{0, 3}, 0.5}, {{1, 0}, 0.5}}), std::invalid_argument);
        // support on a line in the plane: singular covariance
        CHECK_THROWS_AS(IncrementLaw::finite_custom(2, {{{0, 0}, 0.5}, {{1, 0}, 0.25}, {{-1, 0}, 0.25}}),
                        std::invalid_argument);
        const IncrementLaw ok = IncrementLaw::finite_custom(1, {{{0, 0}, 0.5}, {{1, 0}, 0.25}, {{-1, 0}, 0.25}});
        CHECK(ok.max_step() == 1);
        // diagnostic laws are constructible on request
        const IncrementLaw periodic = IncrementLaw::finite_custom(1, {{{1, 0}, 0.5}, {{-1, 0}, 0.5}},
                                                                  LawChecks::allow_lattice_periodic);
        CHECK(aperiodicity_witness(periodic, 256) == doctest::Approx(1.0));
    }

    TEST_CASE("descriptors round-trip") {
        for (const char* spec : {"zipf1d", "lazy2d", "zipf1d-trunc:3"}) {
            const IncrementLaw a = IncrementLaw::parse(spec);
            const IncrementLaw b = IncrementLaw::from_json(a.to_json());
            CHECK(a.to_json() == b.to_json());
            CHECK(a.name() == b.name());
        }
        const std::string path = (std::filesystem::temp_directory_path() / "silt_custom_law.json").string();
        {
            std::ofstream f(path);
            f << R"({"kind":"finite_custom","parameters":{"dimension":1,"pmf":[{"site":[0],"p":0.5},{"site":[2],"p":0.25},{"site":[-1],"p":0.25}]}})";
        }
        const IncrementLaw c = IncrementLaw::parse("custom:" + path);
        CHECK(c.pmf({2, 0}) == 0.25);
        {
            std::ofstream f(path);
            f << R"({"kind":"finite_custom","parameters":{"dimension":1,"pmf":[{"site":[0],"p":0.5},)";
        }
        CHECK_THROWS(IncrementLaw::parse("custom:" + path));
        CHECK_THROWS(IncrementLaw::parse("nonsense"));
    }

    TEST_CASE("zipf tail against direct summation") {
        for (long K : {10L, 100L}) {
            double direct = 0.0;
            for (long k = 50'000'000; k > K; --k) direct += 2.0 * 3.0 / (kPi * kPi * double(k) * double(k));
            direct += 2.0 * 3.0 / (kPi * kPi) * (1.0 / 50'000'000.5);  // Euler-Maclaurin tail
            CHECK(std::abs(zipf_tail(K + 1) - direct) < 1e-10);
        }
    }

    TEST_CASE("sampler frequencies and goodness of fit") {
        const IncrementLaw z = IncrementLaw::zipf1d();
        Engine rng = make_engine(2024);
        constexpr int draws = 1'000'000;
        std::vector<double> observed(101, 0.0);  // bins -50..-1, 1..50, tail
        int ones = 0;
        for (int i = 0; i < draws; ++i) {
            const std::int64_t x = z.sample(rng).x;
            REQUIRE(x != 0);
            if (std::abs(x) == 1) ++ones;
            if (std::abs(x) > 50) observed[100] += 1;
            else observed[x < 0 ? x + 50 : x + 49] += 1;
        }
        CHECK(double(ones) / draws == doctest::Approx(6.0 / (kPi * kPi)).epsilon(0.002 / 0.6079));
        double chi2 = 0.0;
        for (int b = 0; b < 100; ++b) {
            const long k = b < 50 ? b - 50 : b - 49;
            const double expected = draws * 3.0 / (kPi * kPi * double(k) * double(k));
            chi2 += (observed[b] - expected) * (observed[b] - expected) / expected;
        }
        const double tail_expected = draws * zipf_tail(51);
        chi2 += (observed[100] - tail_expected) * (observed[100] - tail_expected) / tail_expected;
        boost::math::chi_squared dist(100);
        CHECK(chi2 < boost::math::quantile(dist, 0.999));

        const IncrementLaw lazy = IncrementLaw::lazy_srw_2d();
        Engine r2 = make_engine(7);
        int zeros = 0;
        for (int i = 0; i < draws; ++i) zeros += lazy.sample(r2) == Site{0, 0};
        CHECK(std::abs(double(zeros) / draws - 0.5) < 0.002);
    }

    TEST_CASE("deep tail sampling stays exact") {
        // u near 0 lands far in the tail; the magnitude must satisfy the tail bracket
        for (double u : {1e-3, 1e-6, 1e-9, 1e-12}) {
            const std::int64_t k = zipf_magnitude(u);
            CHECK(zipf_tail(k + 1) < u * zipf_tail(1) + 1e-300);
            CHECK(zipf_tail(k) >= u * zipf_tail(1) * (1 - 1e-12));
        }
    }

    TEST_CASE("identical seeds give identical sequences") {
        const IncrementLaw z = IncrementLaw::zipf1d();
        Engine a = make_engine(99), b = make_engine(99);
        for (int i = 0; i < 1000; ++i) CHECK(z.sample(a) == z.sample(b));
    }

    TEST_CASE("aperiodicity witness") {
        CHECK(aperiodicity_witness(IncrementLaw::lazy_srw_2d(), 256) < 1.0);
        CHECK(aperiodicity_witness(IncrementLaw::zipf1d(), 256) < 1.0);
        CHECK_THROWS(aperiodicity_witness(IncrementLaw::zipf1d(), 32));
    }

    TEST_CASE("gamma from the characteristic function") {
        const IncrementLaw z = IncrementLaw::zipf1d();
        std::vector<double> ts;
        for (int k = 4; k <= 20; ++k) ts.push_back(std::ldexp(1.0, -k));
        const GammaEstimate g = gamma_from_charfn(z, ts);
        CHECK(g.converged);
        CHECK(std::abs(g.estimate - 3.0 / kPi) < 1e-6);
        const std::vector<double> coarse = {0.1, 0.01, 0.001};
        const GammaEstimate c = gamma_from_charfn(z, coarse);
        for (std::size_t i = 0; i < coarse.size(); ++i)
            CHECK(c.ratios[i] == doctest::Approx(3.0 / kPi - 3.0 / (2 * kPi * kPi) * coarse[i]).epsilon(1e-12));
        CHECK(c.ratios[0] < c.ratios[1]);
        const IncrementLaw line = IncrementLaw::finite_custom(1, {{{0, 0}, 0.5}, {{1, 0}, 0.25}, {{-1, 0}, 0.25}});
        const GammaEstimate flat = gamma_from_charfn(line, ts);
        CHECK_FALSE(flat.converged);
        CHECK(flat.estimate == 0.0);
        const GammaEstimate lazy = gamma_from_charfn(IncrementLaw::lazy_srw_2d(), ts);
        CHECK_FALSE(lazy.converged);
        CHECK(lazy.estimate == 0.0);
    }
}
