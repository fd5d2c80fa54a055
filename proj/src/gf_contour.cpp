#include "silt/gf_contour.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <stdexcept>

#include "silt/parallel.hpp"

namespace silt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double parse_double(std::string_view text, std::string_view what) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw std::invalid_argument(fmt::format("bad {} '{}'", what, text));
    return v;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
    std::int64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw std::invalid_argument(fmt::format("bad {} '{}'", what, text));
    return v;
}

SeriesSpec polynomial_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument(fmt::format("unknown series '{}' (not a builtin and not a readable file)", path));
    nlohmann::json j;
    in >> j;
    if (!j.is_array() || j.empty()) throw std::invalid_argument("series file must hold a non-empty array of coefficients");
    std::vector<double> c = j.get<std::vector<double>>();
    return {path, [c](Complex z) {
                Complex acc = 0.0;
                for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
                return acc;
            }};
}

}  // namespace

SeriesSpec builtin_series(std::string_view name) {
    const std::string label(name);
    if (name == "inv1mz2") return {label, [](Complex z) { return 1.0 / ((1.0 - z) * (1.0 - z)); }};
    if (name == "inv1mz3") return {label, [](Complex z) { return 1.0 / std::pow(1.0 - z, 3); }};
    if (name == "log_over_1mz2")
        return {label, [](Complex z) { return -std::log(1.0 - z) / ((1.0 - z) * (1.0 - z)); }};
    if (name == "exp") return {label, [](Complex z) { return std::exp(z); }};
    if (name == "poly7") return {label, [](Complex z) { return std::pow(z, 7); }};
    const auto colon = name.find(':');
    if (colon != std::string_view::npos) {
        const std::string_view head = name.substr(0, colon);
        const RenewalLaw law = RenewalLaw::parse(name.substr(colon + 1));
        const double mu = law.mu();
        if (head == "renewal_a") return {label, [law](Complex z) { return renewal_gf(law, z).a; }};
        if (head == "renewal_b") return {label, [law](Complex z) { return renewal_gf(law, z).b; }};
        if (head == "renewal_a_rem")
            return {label, [law, mu](Complex z) { return renewal_gf(law, z).a - 1.0 / ((1.0 - z) * (1.0 - z) * mu); }};
        if (head == "renewal_b_rem")
            return {label, [law, mu](Complex z) { return renewal_gf(law, z).b - 2.0 / (std::pow(1.0 - z, 3) * mu * mu); }};
        throw std::invalid_argument(fmt::format("unknown series family '{}'", head));
    }
    return polynomial_from_file(label);
}

double contour_radius(int n) { return n == 1 ? 0.5 : 1.0 - 1.0 / static_cast<double>(n); }

Complex cauchy_coefficient_complex(const SeriesSpec& series, int n, int points, unsigned workers) {
    if (n < 1) throw std::invalid_argument("coefficient index must be at least 1");
    if (points < 2 * n)
        throw std::invalid_argument(fmt::format("{} circle points for n = {} would alias badly; need at least 2n", points, n));
    const double R = contour_radius(n);
    const auto M = static_cast<std::size_t>(points);
    std::vector<Complex> roots(M);
    for (std::size_t k = 0; k < M; ++k)
        roots[k] = std::polar(1.0, kTwoPi * static_cast<double>(k) / static_cast<double>(M));
    std::vector<Complex> slots(M);
    parallel_for(M, workers, [&](std::size_t k) {
        const auto phase = (static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(n)) % M;
        slots[k] = series.evaluator(R * roots[k]) * std::conj(roots[phase]);
    });
    Complex sum = 0.0;
    for (const Complex& v : slots) sum += v;
    return sum / static_cast<double>(M) * std::pow(R, -n);
}

double cauchy_coefficient(const SeriesSpec& series, int n, int points, unsigned workers) {
    return cauchy_coefficient_complex(series, n, points, workers).real();
}

double darboux_constant(double gamma) {
    if (!(gamma > 1.0)) throw std::invalid_argument(fmt::format("C(gamma) needs gamma > 1, got {}", gamma));
    return 4.0 / std::sqrt(std::numbers::pi) * std::tgamma(0.5 * (gamma - 1.0)) / std::tgamma(0.5 * gamma);
}

double slowly_varying(SlowlyVarying form, double x) {
    switch (form) {
        case SlowlyVarying::constant: return 1.0;
        case SlowlyVarying::log: return std::log1p(x);
        case SlowlyVarying::log_squared: {
            const double l = std::log1p(x);
            return l * l;
        }
    }
    return 1.0;
}

std::string_view to_string(SlowlyVarying form) {
    switch (form) {
        case SlowlyVarying::constant: return "1";
        case SlowlyVarying::log: return "log";
        case SlowlyVarying::log_squared: return "log2";
    }
    return "1";
}

SlowlyVarying parse_slowly_varying(std::string_view name) {
    if (name == "1" || name == "const" || name == "constant") return SlowlyVarying::constant;
    if (name == "log") return SlowlyVarying::log;
    if (name == "log2" || name == "log_squared") return SlowlyVarying::log_squared;
    throw std::invalid_argument(fmt::format("unknown slowly varying form '{}'", name));
}

double darboux_bound(const DarbouxHypothesis& hyp, int n) {
    if (n < 1) throw std::invalid_argument("n must be at least 1");
    double total = 4.0 * hyp.K;
    for (const DarbouxTerm& t : hyp.terms) {
        if (t.A < 0.0) throw std::invalid_argument("term amplitude must be non-negative");
        total += t.A * darboux_constant(t.gamma) * std::pow(static_cast<double>(n), t.gamma - 1.0) *
                 slowly_varying(t.l, static_cast<double>(n));
    }
    return total;
}

DarbouxHypothesis fit_hypothesis(const SeriesSpec& series, const std::vector<DarbouxTerm>& shape,
                                 const FitOptions& opt) {
    for (const DarbouxTerm& t : shape)
        if (!(t.gamma > 1.0)) throw std::invalid_argument("every term needs gamma > 1");
    DarbouxHypothesis hyp;
    hyp.alpha = shape.empty() ? 1.0 : opt.alpha;
    double multiplier = 0.0;
    for (int j = 0; j <= opt.radial_levels; ++j) {
        const double r = 1.0 - std::exp2(-0.25 * j);
        const int count = j == 0 ? 1 : opt.angles;
        for (int k = 0; k < count; ++k) {
            const Complex z = std::polar(r, kTwoPi * k / count);
            const double g = std::abs(series.evaluator(z));
            if (z.real() <= hyp.alpha) {
                hyp.K = std::max(hyp.K, g);
                continue;
            }
            const double d = std::abs(1.0 - z);
            double s = 0.0;
            for (const DarbouxTerm& t : shape) s += t.A * std::pow(d, -t.gamma) * slowly_varying(t.l, 1.0 / d);
            if (s > 0.0) multiplier = std::max(multiplier, g / s);
        }
    }
    hyp.terms = shape;
    for (DarbouxTerm& t : hyp.terms) t.A *= multiplier;
    return hyp;
}

bool DarbouxReport::all_hold() const {
    return std::all_of(rows.begin(), rows.end(), [](const DarbouxRow& r) { return r.holds; });
}

DarbouxReport verify_darboux(const SeriesSpec& series, const DarbouxHypothesis& hyp, const std::vector<int>& n_values,
                             int points_per_n, unsigned workers) {
    if (points_per_n < 2) throw std::invalid_argument("points_per_n must be at least 2");
    DarbouxReport report;
    for (int n : n_values) {
        const int m = std::max(16, points_per_n * n);
        const double coarse = cauchy_coefficient(series, n, m, workers);
        const double fine = cauchy_coefficient(series, n, 2 * m, workers);
        DarbouxRow row;
        row.n = n;
        row.coefficient = fine;
        row.aliasing = std::abs(coarse - fine);
        row.bound = darboux_bound(hyp, n);
        row.holds = std::abs(fine) <= row.bound + row.aliasing;
        report.rows.push_back(row);
    }
    return report;
}

RenewalLaw RenewalLaw::geometric(double p) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("geometric parameter must lie in (0, 1]");
    RenewalLaw law;
    law.name_ = fmt::format("geometric:{}", p);
    law.geometric_p_ = p;
    law.mu_ = 1.0 / p;
    return law;
}

RenewalLaw RenewalLaw::finite(std::vector<double> pmf) {
    if (pmf.empty()) throw std::invalid_argument("renewal pmf is empty");
    double total = 0.0, mean = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        if (!(pmf[k] >= 0.0) || !std::isfinite(pmf[k])) throw std::invalid_argument("renewal pmf has a negative mass");
        total += pmf[k];
        mean += static_cast<double>(k) * pmf[k];
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument(fmt::format("renewal pmf sums to {}", total));
    if (pmf[0] >= 1.0) throw std::invalid_argument("P(T = 0) = 1 gives infinitely many renewals");
    RenewalLaw law;
    std::string label = "pmf:";
    for (std::size_t k = 0; k < pmf.size(); ++k)
        if (pmf[k] > 0.0) label += fmt::format("{}{}={}", label.size() > 4 ? "," : "", k, pmf[k]);
    law.name_ = label;
    law.mu_ = mean;
    law.pmf_ = std::move(pmf);
    double c = 0.0;
    for (double p : law.pmf_) law.cumulative_.push_back(c += p);
    return law;
}

RenewalLaw RenewalLaw::parse(std::string_view spec) {
    if (spec.starts_with("geometric:")) return geometric(parse_double(spec.substr(10), "geometric parameter"));
    if (spec.starts_with("pmf:")) {
        std::vector<double> pmf;
        std::string_view rest = spec.substr(4);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = rest.substr(0, comma);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) throw std::invalid_argument(fmt::format("bad pmf item '{}'", item));
            const std::int64_t k = parse_int(item.substr(0, eq), "renewal time");
            if (k < 0 || k > 1'000'000) throw std::invalid_argument("renewal times must lie in [0, 1e6]");
            const double p = parse_double(item.substr(eq + 1), "renewal mass");
            if (pmf.size() <= static_cast<std::size_t>(k)) pmf.resize(static_cast<std::size_t>(k) + 1, 0.0);
            if (pmf[k] != 0.0) throw std::invalid_argument(fmt::format("duplicate renewal time {}", k));
            pmf[k] = p;
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        }
        return finite(std::move(pmf));
    }
    throw std::invalid_argument(fmt::format("unknown renewal law '{}'", spec));
}

double RenewalLaw::pmf(std::int64_t k) const {
    if (k < 0) return 0.0;
    if (is_geometric()) return k == 0 ? 0.0 : geometric_p_ * std::pow(1.0 - geometric_p_, static_cast<double>(k - 1));
    return static_cast<std::size_t>(k) < pmf_.size() ? pmf_[k] : 0.0;
}

Complex RenewalLaw::pgf(Complex lambda) const {
    if (is_geometric()) return geometric_p_ * lambda / (1.0 - (1.0 - geometric_p_) * lambda);
    Complex acc = 0.0;
    for (auto it = pmf_.rbegin(); it != pmf_.rend(); ++it) acc = acc * lambda + *it;
    return acc;
}

std::int64_t RenewalLaw::sample(Engine& rng) const {
    if (is_geometric()) {
        if (geometric_p_ == 1.0) return 1;
        const double u = uniform_open0(rng);
        return 1 + static_cast<std::int64_t>(std::floor(std::log(u) / std::log1p(-geometric_p_)));
    }
    const double u = uniform01(rng) * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::int64_t>(it - cumulative_.begin(), static_cast<std::int64_t>(pmf_.size()) - 1);
}

RenewalGF renewal_gf(const RenewalLaw& law, Complex lambda) {
    if (!(std::abs(lambda) < 1.0)) throw std::invalid_argument("renewal generating functions need |lambda| < 1");
    const Complex f = law.pgf(lambda);
    const Complex a = f / ((1.0 - lambda) * (1.0 - f));
    return {a, a + 2.0 * a * f / (1.0 - f)};
}

RenewalMoments renewal_moments_exact(const RenewalLaw& law, int n) {
    if (n < 0 || n > 100'000) throw std::invalid_argument("renewal_moments_exact supports 0 <= n <= 1e5");
    const auto len = static_cast<std::size_t>(n) + 1;
    std::vector<double> u(len), v(len);
    const double p0 = law.pmf(0);
    const double q = 1.0 - p0;
    // conv(m) = sum_{k >= 1} p_k x(m - k); geometric laws admit a one-term recursion
    double su = 0.0, sw = 0.0;
    const double gp = law.geometric_p();
    for (std::size_t m = 0; m < len; ++m) {
        double cu = 0.0, cw = 0.0;
        if (law.is_geometric()) {
            if (m > 0) {
                su = gp * u[m - 1] + (1.0 - gp) * su;
                sw = gp * (u[m - 1] + v[m - 1]) + (1.0 - gp) * sw;
            }
            cu = su;
            cw = sw;
        } else {
            const auto& t = law.table();
            for (std::size_t k = 1; k < t.size() && k <= m; ++k) {
                cu += t[k] * u[m - k];
                cw += t[k] * (u[m - k] + v[m - k]);
            }
        }
        u[m] = ((m == 0 ? 1.0 : 0.0) + cu) / q;
        v[m] = (p0 * u[m] + cw) / q;
    }
    RenewalMoments out;
    out.first.resize(len);
    out.second.resize(len);
    double cu = 0.0, cs = 0.0;
    for (std::size_t m = 0; m < len; ++m) {
        cu += u[m];
        cs += 2.0 * v[m] - u[m];
        out.first[m] = cu - 1.0;
        out.second[m] = cs + 1.0;
    }
    return out;
}

double RenewalBoundFit::bound(int n) const {
    return C * std::pow(static_cast<double>(n), 1.0 - delta) * slowly_varying(l, static_cast<double>(n)) + rounding(n);
}

double RenewalBoundFit::rounding(int n) const {
    const double x = static_cast<double>(n);
    return 4.0 * std::numeric_limits<double>::epsilon() * x * (x / mu + 1.0);
}

RenewalBoundFit fit_renewal_bound(const RenewalMoments& m, double mu, int fit_max, double delta, SlowlyVarying l) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (fit_max < 1 || static_cast<std::size_t>(fit_max) >= m.first.size())
        throw std::invalid_argument("fit range exceeds the computed moments");
    RenewalBoundFit fit{delta, l, 0.0, mu};
    for (int n = 1; n <= fit_max; ++n) {
        const double shape = std::pow(static_cast<double>(n), 1.0 - delta) * slowly_varying(l, static_cast<double>(n));
        const double excess = std::abs(m.first[n] - n / mu) - fit.rounding(n);
        fit.C = std::max(fit.C, excess / shape);
    }
    return fit;
}

std::vector<LlnRow> renewal_lln_check(const RenewalLaw& law, const std::vector<std::int64_t>& n_list, int reps,
                                      std::uint64_t seed, unsigned workers) {
    if (reps < 1) throw std::invalid_argument("reps must be positive");
    std::vector<std::int64_t> ns = n_list;
    if (ns.empty()) return {};
    if (!std::is_sorted(ns.begin(), ns.end()) || ns.front() < 1)
        throw std::invalid_argument("n list must be positive and increasing");
    const double inv_mu = 1.0 / law.mu();
    std::vector<std::vector<double>> dev(static_cast<std::size_t>(reps), std::vector<double>(ns.size()));
    parallel_for(static_cast<std::size_t>(reps), workers, [&](std::size_t rep) {
        Engine rng = make_engine(derive_seed(seed, rep));
        std::int64_t count = 0;
        std::int64_t pending = law.sample(rng);
        for (std::size_t i = 0; i < ns.size(); ++i) {
            while (pending <= ns[i]) {
                ++count;
                pending += law.sample(rng);
            }
            dev[rep][i] = std::abs(static_cast<double>(count) / static_cast<double>(ns[i]) - inv_mu);
        }
    });
    std::vector<LlnRow> out;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        LlnRow row{ns[i], 0.0, 0.0};
        for (const auto& d : dev) {
            row.max_deviation = std::max(row.max_deviation, d[i]);
            row.mean_deviation += d[i];
        }
        row.mean_deviation /= reps;
        out.push_back(row);
    }
    return out;
}

}  // namespace silt
