#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <json.hpp>

#include "silt/cli_runner.hpp"
#include "silt/exact_moments.hpp"
#include "silt/gf_contour.hpp"
#include "silt/parallel.hpp"
#include "silt/path_engine.hpp"
#include "silt/quadratures.hpp"
#include "silt/rwrs_sim.hpp"
#include "silt/variance_mc.hpp"

using namespace silt;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, std::string what) {
        if (!ok) pass = false;
        notes.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
    }
    void info(std::string what) { notes.push_back("info " + what); }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// 1. decomposition against full path enumeration
Verdict decomposition() {
    Verdict v;
    for (const char* spec : {"lazy2d", "zipf1d-trunc:3"}) {
        const IncrementLaw law = IncrementLaw::parse(spec);
        double worst = 0.0, worst_a1b1 = 0.0;
        for (int n = 2; n <= 8; ++n) {
            const EnumerationResult e = variance_enumeration(law, n);
            const VarianceDecomposition d = variance_exact(law, n);
            worst = std::max(worst, rel(d.var(), e.var()));
            worst_a1b1 = std::max({worst_a1b1, std::abs(e.set_sum(IndexSet::A1)), std::abs(e.set_sum(IndexSet::B1))});
        }
        v.require(worst <= 1e-10, fmt::format("{}: max relative gap over n = 2..8 is {:.3e} (limit 1e-10)", spec, worst));
        v.require(worst_a1b1 <= 1e-12, fmt::format("{}: max |A1|, |B1| sum is {:.3e} (limit 1e-12)", spec, worst_a1b1));
    }
    return v;
}

// 2. closed-form integral identities
Verdict identities() {
    Verdict v;
    const std::pair<double, double> points[] = {{0.75, 1.0}, {0.9, 2.0}, {0.6, 3.0 / kPi}, {0.5, 0.5}};
    for (auto [l, g] : points) {
        const IdentityCheck a3 = proof_integral_1d_a3(l, g);
        v.require(a3.relative_error() <= 1e-6,
                  fmt::format("a3 at lambda={} gamma={:.6g}: rel err {:.3e}", l, g, a3.relative_error()));
        const IdentityPair a2 = proof_integrals_1d_a2(l, g);
        v.require(a2.first.relative_error() <= 1e-6,
                  fmt::format("a2 |x+y| kernel at lambda={} gamma={:.6g}: rel err {:.3e}", l, g, a2.first.relative_error()));
        v.require(a2.second.relative_error() <= 1e-6,
                  fmt::format("a2 |x|+|y| kernel at lambda={} gamma={:.6g}: rel err {:.3e}", l, g,
                              a2.second.relative_error()));
    }
    for (double l : {0.5, 0.6, 0.75, 0.9}) {
        const IdentityCheck p = proof_integral_2d(l);
        v.require(p.relative_error() <= 1e-6, fmt::format("planar at lambda={}: rel err {:.3e}", l, p.relative_error()));
    }
    const QuadratureResult inner = proof_integral_2d_inner();
    v.require(std::abs(inner.value - 1.0) <= 1e-8, fmt::format("planar inner integral {:.15f} (limit 1e-8)", inner.value));
    return v;
}

// 3. kappa from two integrators and the frozen fixture
Verdict kappa_stability() {
    Verdict v;
    std::ifstream in(SILT_FIXTURES "/kappa.json");
    const nlohmann::json fx = nlohmann::json::parse(in);
    const double frozen = fx.at("value").get<double>();
    const double tol = fx.at("tolerance").get<double>();
    const QuadratureResult a = kappa(1e-8);
    const QuadratureResult q = kappa_qmc();
    v.info(fmt::format("adaptive {:.16f} (est {:.2e}), lattice {:.16f} (se {:.2e})", a.value, a.error_estimate, q.value,
                       q.error_estimate));
    v.require(std::abs(a.value - q.value) <= 1e-5, fmt::format("integrators differ by {:.3e} (limit 1e-5)", std::abs(a.value - q.value)));
    v.require(std::abs(a.value - frozen) <= tol, fmt::format("adaptive vs fixture {:.3e} (tolerance {:.1e})", std::abs(a.value - frozen), tol));
    v.require(std::abs(q.value - frozen) <= tol, fmt::format("lattice vs fixture {:.3e} (tolerance {:.1e})", std::abs(q.value - frozen), tol));
    return v;
}

// 4. coefficient bounds
Verdict darboux() {
    Verdict v;
    v.require(rel(darboux_constant(2.0), 4.0) <= 1e-14, fmt::format("C(2) = {:.17g}", darboux_constant(2.0)));
    v.require(rel(darboux_constant(3.0), 8.0 / kPi) <= 1e-14, fmt::format("C(3) = {:.17g}", darboux_constant(3.0)));
    const double a5 = cauchy_coefficient(builtin_series("inv1mz3"), 5, 512);
    v.require(std::abs(a5 - 21.0) <= 1e-6, fmt::format("a_5 of (1-z)^-3 = {:.15f}", a5));

    struct Case {
        const char* series;
        std::vector<DarbouxTerm> terms;
    };
    const std::vector<Case> family = {
        {"inv1mz3", {{1.0, 3.0, SlowlyVarying::constant}}},
        {"log_over_1mz2", {{1.0, 2.0, SlowlyVarying::log}}},
        {"exp", {}},
        {"renewal_a_rem:geometric:0.5", {{1.0, 1.5, SlowlyVarying::constant}}},
        {"renewal_b_rem:geometric:0.5", {{1.0, 2.0, SlowlyVarying::constant}}},
        {"renewal_a_rem:pmf:1=0.5,2=0.5", {{1.0, 1.5, SlowlyVarying::constant}}},
    };
    std::vector<int> ns(2000);
    for (int i = 0; i < 2000; ++i) ns[i] = i + 1;
    for (const Case& c : family) {
        const SeriesSpec s = builtin_series(c.series);
        const DarbouxHypothesis h = fit_hypothesis(s, c.terms);
        const DarbouxReport r = verify_darboux(s, h, ns);
        double min_ratio = INFINITY, max_alias = 0.0;
        int violations = 0;
        for (const DarbouxRow& row : r.rows) {
            if (!row.holds) ++violations;
            if (row.coefficient != 0.0) min_ratio = std::min(min_ratio, row.bound / std::abs(row.coefficient));
            max_alias = std::max(max_alias, row.aliasing);
        }
        v.require(r.all_hold(), fmt::format("{}: K={:.4g} alpha={:.3g}, {} violations over n <= 2000, min bound/|a_n| {:.3g}, max aliasing {:.2e}",
                                            c.series, h.K, h.alpha, violations, min_ratio, max_alias));
    }
    return v;
}

// 5. renewal counts
Verdict renewal() {
    Verdict v;
    for (const char* spec : {"geometric:0.5", "geometric:0.2", "pmf:1=0.5,2=0.5"}) {
        const RenewalLaw law = RenewalLaw::parse(spec);
        const RenewalMoments m = renewal_moments_exact(law, 10000);
        const SeriesSpec a = builtin_series(std::string("renewal_a:") + spec);
        const SeriesSpec b = builtin_series(std::string("renewal_b:") + spec);
        double worst_a = 0.0, worst_b = 0.0;
        for (int n = 1; n <= 200; ++n) {
            const int points = std::max(32 * n, 256);
            worst_a = std::max(worst_a, std::abs(cauchy_coefficient(a, n, points) - m.first[n]) / std::max(1.0, m.first[n]));
            worst_b = std::max(worst_b, std::abs(cauchy_coefficient(b, n, points) - m.second[n]) / std::max(1.0, m.second[n]));
        }
        v.require(worst_a <= 1e-6 && worst_b <= 1e-6,
                  fmt::format("{}: contour vs recursion, n <= 200: a {:.2e}, b {:.2e} (limit 1e-6)", spec, worst_a, worst_b));
        const RenewalBoundFit fit = fit_renewal_bound(m, law.mu(), 100, 0.5);
        int bad = 0;
        double worst_dev = 0.0;
        for (int n = 1; n <= 10000; ++n) {
            const double dev = std::abs(m.first[n] - n / law.mu());
            worst_dev = std::max(worst_dev, dev);
            if (dev > fit.bound(n)) ++bad;
        }
        v.require(bad == 0, fmt::format("{}: |E N_n - n/mu| <= C n^(1/2) + rounding with C = {:.4g} fitted on n <= 100; {} violations on n <= 10^4 (max dev {:.3e})",
                                        spec, fit.C, bad, worst_dev));
    }
    const auto lln = renewal_lln_check(RenewalLaw::geometric(0.5), {1000, 100000}, 100, 20240);
    v.require(lln[1].max_deviation < 0.02,
              fmt::format("geometric:0.5 LLN at n = 10^5, 100 reps: max deviation {:.4e} (limit 0.02)", lln[1].max_deviation));
    v.info(fmt::format("mean deviation at 10^3 {:.3e}, at 10^5 {:.3e}", lln[0].mean_deviation, lln[1].mean_deviation));
    return v;
}

// 6. exact expectation law
Verdict expectation() {
    Verdict v;
    const auto rows = expectation_trend(IncrementLaw::zipf1d(), {1000, 1000000});
    const double target = 2.0 / 3.0;
    v.info(fmt::format("E V_n/(n log n): n=1e3 {:.6f}, n=1e6 {:.6f}, target {:.6f}", rows[0].ratio, rows[1].ratio, target));
    v.require(rows[1].ratio >= 0.8 * target && rows[1].ratio <= 1.2 * target, "n = 10^6 ratio inside [0.8, 1.2] x 2/3");
    v.require(std::abs(rows[1].ratio - target) < std::abs(rows[0].ratio - target), "n = 10^6 strictly closer to 2/3 than n = 10^3");
    return v;
}

// 7. Monte Carlo variance trend
Verdict variance_trend_check() {
    Verdict v;
    constexpr std::int64_t reps = 100000;
    const std::vector<std::int64_t> ns = {8, 16, 32, 1024, 2048, 4096, 8192, 16384};
    for (const char* spec : {"zipf1d", "lazy2d"}) {
        const IncrementLaw law = IncrementLaw::parse(spec);
        const double target = theorem1_constant(law);
        const auto rows = variance_trend(law, ns, reps, 0x7e3d, default_workers());
        const auto exact = variance_profile(law, 32);
        for (const auto& r : rows) {
            const auto n = r.summary.n;
            if (n <= 32) {
                const double ex = exact[n].var();
                v.require(std::abs(r.summary.var_Vn - ex) <= 3 * r.summary.ci_var,
                          fmt::format("{} n={}: MC var {:.6g} vs exact {:.6g}, gap {:.3g} (3 CI = {:.3g})", spec, n,
                                      r.summary.var_Vn, ex, std::abs(r.summary.var_Vn - ex), 3 * r.summary.ci_var));
            } else {
                v.require(r.ratio >= 0.25 * target && r.ratio <= 4 * target,
                          fmt::format("{} n={}: var/n^2 = {:.5f} +- {:.5f}, band [{:.4f}, {:.4f}]", spec, n, r.ratio,
                                      r.ratio_ci, 0.25 * target, 4 * target));
            }
        }
        const auto& first = rows[3];
        const auto& last = rows.back();
        v.require(std::abs(last.ratio - target) <= std::abs(first.ratio - target),
                  fmt::format("{}: |last - target| = {:.5f} vs |first - target| = {:.5f} (target {:.6f})", spec,
                              std::abs(last.ratio - target), std::abs(first.ratio - target), target));
    }
    return v;
}

// 8. growth of the exact variance
Verdict variance_growth() {
    Verdict v;
    const IncrementLaw law = IncrementLaw::lazy_srw_2d();
    const auto prof = variance_profile(law, 48);
    const double bound = 4 * theorem1_constant(law);
    double max_ratio = 0.0;
    int argmax = 16;
    for (int n = 1; n <= 48; ++n) {
        const double r = prof[n].var() / (double(n) * n);
        if (n >= 16 && r > max_ratio) {
            max_ratio = r;
            argmax = n;
        }
        if (n % 8 == 0) v.info(fmt::format("n={} var/n^2={:.6f}", n, r));
    }
    double overall = 0.0;
    for (int n = 1; n <= 48; ++n) overall = std::max(overall, prof[n].var() / (double(n) * n));
    v.require(overall <= bound, fmt::format("max var/n^2 over n <= 48 is {:.6f}, bound {:.6f}", overall, bound));
    v.require(argmax != 48, fmt::format("max over 16 <= n <= 48 attained at n = {}", argmax));
    return v;
}

// 9. quenched central limit behaviour
Verdict quenched_clt() {
    Verdict v;
    const IncrementLaw law = IncrementLaw::zipf1d();
    const unsigned w = default_workers();
    auto moments_ok = [&](const CltReport& r, const char* label) {
        const double se_mean = r.mean_Y_ci / 1.96, se_var = r.var_Y_ci / 1.96;
        v.require(std::abs(r.mean_Y) <= 3 * se_mean,
                  fmt::format("{} walk {}: mean Y {:.4e}, 3 se {:.4e}", label, r.walk_seed, r.mean_Y, 3 * se_mean));
        v.require(std::abs(r.var_Y - r.s_n2) <= 3 * se_var,
                  fmt::format("{} walk {}: var Y {:.5f} vs s_n^2 {:.5f}, 3 se {:.4e}", label, r.walk_seed, r.var_Y, r.s_n2, 3 * se_var));
    };
    // scenery bases pass through mix64 so the replicate seed ranges of different checks never overlap
    for (std::uint64_t walk : {101ULL, 202ULL, 303ULL}) {
        const CltReport g = quenched_clt_test(law, 100000, 4000, walk, mix64(16 * walk + 1), SceneryKind::gaussian, w);
        v.require(g.ks <= g.ks_band, fmt::format("gaussian walk {}: KS {:.4f}, band {:.4f}", walk, g.ks, g.ks_band));
        moments_ok(g, "gaussian");
        const CltReport big = quenched_clt_test(law, 100000, 4000, walk, mix64(16 * walk + 2), SceneryKind::rademacher, w);
        const CltReport small = quenched_clt_test(law, 1000, 4000, walk, mix64(16 * walk + 3), SceneryKind::rademacher, w);
        v.require(big.ks < 0.03, fmt::format("rademacher walk {} n=1e5: KS {:.4f} (limit 0.03), exact KS {:.5f}", walk,
                                             big.ks, big.exact_ks));
        v.require(small.exact_ks >= big.exact_ks,
                  fmt::format("rademacher walk {}: exact KS n=1e3 {:.5f} >= n=1e5 {:.5f} (sampled {:.4f}, {:.4f})", walk,
                              small.exact_ks, big.exact_ks, small.ks, big.ks));
        moments_ok(big, "rademacher");
    }
    return v;
}

// 10. determinism of every command
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Verdict determinism() {
    Verdict v;
    const fs::path dir = fs::temp_directory_path() / "silt_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::vector<std::vector<std::string>> cmds = {
        {"laws", "inspect", "--law", "zipf1d"},
        {"walk", "simulate", "--law", "zipf1d", "--n", "2000", "--reps", "50", "--seed", "3"},
        {"variance", "exact", "--law", "lazy2d", "--n-max", "16"},
        {"variance", "mc", "--law", "lazy2d", "--n", "32,256", "--reps", "500", "--seed", "8"},
        {"expectation", "trend", "--law", "zipf1d", "--n", "10,1000,100000"},
        {"contour", "extract", "--series", "renewal_b:geometric:0.5", "--n", "40"},
        {"darboux", "verify", "--series", "log_over_1mz2", "--terms", "2:log", "--n-max", "200"},
        {"renewal", "--law", "geometric:0.5", "--mode", "lln", "--n-list", "100,10000", "--reps", "30", "--seed", "5"},
        {"renewal", "--law", "pmf:1=0.5,2=0.5", "--mode", "moments", "--n", "500"},
        {"kappa", "--method", "qmc"},
        {"kappa", "--method", "adaptive", "--tol", "1e-7"},
        {"identities", "--check", "all"},
        {"rwrs", "clt", "--law", "zipf1d", "--n", "5000", "--sceneries", "500", "--scenery", "rademacher"},
    };
    int idx = 0;
    for (const auto& cmd : cmds) {
        std::string label;
        for (const auto& a : cmd) label += (label.empty() ? "" : " ") + a;
        std::vector<std::string> bodies;
        bool ran = true;
        fs::path manifest;
        for (const char* workers : {"1", "4"}) {
            auto args = cmd;
            const fs::path out = dir / fmt::format("run{}_{}.out", idx, workers);
            args.insert(args.end(), {"--workers", workers, "--out", out.string()});
            std::ostringstream o, e;
            if (cli::run(args, o, e) != cli::ok) {
                ran = false;
                v.info(fmt::format("'{}' failed: {}", label, e.str()));
            }
            bodies.push_back(slurp(out));
            manifest = out.string() + ".manifest.json";
        }
        v.require(ran && bodies[0] == bodies[1] && !bodies[0].empty(),
                  fmt::format("'{}': 1 vs 4 workers byte-identical ({} bytes)", label, bodies[0].size()));
        std::ostringstream o, e;
        const int code = cli::run({"reproduce", "--manifest", manifest.string(), "--workers", "2"}, o, e);
        v.require(code == cli::ok, fmt::format("'{}': manifest replays with 2 workers", label));
        ++idx;
    }
    // an edited seed must be caught
    {
        const fs::path m = dir / "run3_1.out.manifest.json";
        nlohmann::json j = nlohmann::json::parse(slurp(m));
        auto argv = j.at("argv").get<std::vector<std::string>>();
        for (std::size_t i = 0; i + 1 < argv.size(); ++i)
            if (argv[i] == "--seed") argv[i + 1] = "9";
        j["argv"] = argv;
        std::ofstream(dir / "edited.json") << j.dump(2);
        std::ostringstream o, e;
        v.require(cli::run({"reproduce", "--manifest", (dir / "edited.json").string()}, o, e) == cli::check_failed,
                  "edited seed detected as a mismatch");
    }
    fs::remove_all(dir);
    return v;
}

struct Criterion {
    int id;
    const char* title;
    std::function<Verdict()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "decomposition exactness", decomposition},
        {2, "closed-form integral identities", identities},
        {3, "kappa stability", kappa_stability},
        {4, "coefficient bound harness", darboux},
        {5, "renewal counts", renewal},
        {6, "exact expectation law", expectation},
        {7, "Monte Carlo variance trend", variance_trend_check},
        {8, "exact variance growth", variance_growth},
        {9, "quenched CLT", quenched_clt},
        {10, "determinism", determinism},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) only = std::atoi(argv[++i]);
        else {
            fmt::print(stderr, "usage: acceptance [--criterion N]\n");
            return 2;
        }
    }
    if (only < 0 || only > 10) {
        fmt::print(stderr, "criterion must be 1..10\n");
        return 2;
    }
    bool all_pass = true;
    for (const Criterion& c : criteria()) {
        if (only != 0 && c.id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v.require(false, fmt::format("exception: {}", e.what()));
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& note : v.notes) fmt::print("  [{}] {}\n", c.id, note);
        fmt::print("criterion {}: {} {} ({:.1f} s)\n", c.id, v.pass ? "PASS" : "FAIL", c.title, secs);
        std::fflush(stdout);
        all_pass = all_pass && v.pass;
    }
    return all_pass ? 0 : 1;
}
