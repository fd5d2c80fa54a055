#include "silt/increment_laws.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/trigamma.hpp>
#include <fmt/format.h>

namespace silt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kZipfHead = 1024;

// tails[k] = P(|X| >= k) for k = 1 .. kZipfHead + 1; tails[0] unused.
const std::vector<double>& zipf_head_tails() {
    static const std::vector<double> tails = [] {
        std::vector<double> t(kZipfHead + 2, 1.0);
        for (int k = 1; k <= kZipfHead + 1; ++k) t[k] = zipf_tail(k);
        return t;
    }();
    return tails;
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a < 0 ? -a : a, b < 0 ? -b : b); }

void check_strongly_aperiodic(int dimension, const std::vector<PmfEntry>& pmf) {
    const Site origin = pmf.front().site;
    if (dimension == 1) {
        std::int64_t g = 0;
        for (const auto& e : pmf) g = gcd64(g, e.site.x - origin.x);
        if (g != 1)
            throw std::invalid_argument(fmt::format(
                "support lies in a coset of {}Z; the walk is not strongly aperiodic", g));
        return;
    }
    std::vector<Site> diffs;
    for (const auto& e : pmf)
        if (e.site != origin) diffs.push_back(e.site - origin);
    std::int64_t g = 0;
    for (std::size_t i = 0; i < diffs.size(); ++i)
        for (std::size_t j = i + 1; j < diffs.size(); ++j)
            g = gcd64(g, diffs[i].x * diffs[j].y - diffs[i].y * diffs[j].x);
    if (g != 1)
        throw std::invalid_argument(
            g == 0 ? std::string("support differences have rank < 2; the walk is not strongly aperiodic")
                   : fmt::format("support differences generate a subgroup of index {}; the walk is "
                                 "not strongly aperiodic",
                                 g));
}

Covariance moment_covariance(const std::vector<PmfEntry>& pmf) {
    double mx = 0, my = 0;
    for (const auto& e : pmf) {
        mx += e.p * static_cast<double>(e.site.x);
        my += e.p * static_cast<double>(e.site.y);
    }
    Covariance c;
    for (const auto& e : pmf) {
        const double dx = static_cast<double>(e.site.x) - mx;
        const double dy = static_cast<double>(e.site.y) - my;
        c.xx += e.p * dx * dx;
        c.xy += e.p * dx * dy;
        c.yy += e.p * dy * dy;
    }
    return c;
}

}  // namespace

std::string_view to_string(LawKind kind) {
    switch (kind) {
        case LawKind::zipf1d: return "zipf1d";
        case LawKind::lazy_srw_2d: return "lazy_srw_2d";
        case LawKind::finite_custom: return "finite_custom";
    }
    return "unknown";
}

double zipf_tail(std::int64_t k) {
    if (k <= 1) return 1.0;
    return 6.0 / (kPi * kPi) * boost::math::trigamma(static_cast<double>(k));
}

std::int64_t zipf_magnitude(double u) {
    const auto& tails = zipf_head_tails();
    if (u > tails[kZipfHead + 1]) {
        // smallest k in [1, kZipfHead] with tails[k + 1] < u
        std::int64_t lo = 1, hi = kZipfHead;
        while (lo < hi) {
            const std::int64_t mid = lo + (hi - lo) / 2;
            if (tails[mid + 1] < u) hi = mid;
            else lo = mid + 1;
        }
        return lo;
    }
    std::int64_t lo = kZipfHead + 1;  // tail(lo) >= u holds here
    std::int64_t hi = 2 * lo;
    constexpr std::int64_t cap = std::int64_t{1} << 62;
    while (hi < cap && zipf_tail(hi + 1) >= u) {
        lo = hi;
        hi *= 2;
    }
    // invariant: tail(lo) >= u, tail(hi + 1) < u (or hi at cap)
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (zipf_tail(mid + 1) < u) hi = mid;
        else lo = mid + 1;
    }
    return lo;
}

IncrementLaw IncrementLaw::zipf1d() {
    IncrementLaw law;
    law.kind_ = LawKind::zipf1d;
    law.dimension_ = 1;
    law.name_ = "zipf1d";
    law.gamma_ = 3.0 / kPi;
    return law;
}

IncrementLaw IncrementLaw::lazy_srw_2d() {
    IncrementLaw law;
    law.kind_ = LawKind::lazy_srw_2d;
    law.dimension_ = 2;
    law.name_ = "lazy2d";
    law.table_ = {{{-1, 0}, 0.125}, {{0, -1}, 0.125}, {{0, 0}, 0.5}, {{0, 1}, 0.125}, {{1, 0}, 0.125}};
    law.covariance_ = Covariance{0.25, 0.0, 0.25};
    law.build_sampler();
    return law;
}

IncrementLaw IncrementLaw::finite_custom(int dimension, std::vector<PmfEntry> pmf, LawChecks checks) {
    if (dimension != 1 && dimension != 2) throw std::invalid_argument("dimension must be 1 or 2");
    if (pmf.empty()) throw std::invalid_argument("pmf is empty");
    double total = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        const auto& e = pmf[i];
        if (!(e.p >= 0.0) || !std::isfinite(e.p))
            throw std::invalid_argument(fmt::format("pmf[{}]: negative or non-finite mass {}", i, e.p));
        if (dimension == 1 && e.site.y != 0)
            throw std::invalid_argument(fmt::format("pmf[{}]: two-dimensional site in a 1-d law", i));
        total += e.p;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument(fmt::format("pmf sums to {:.17g}, not 1 within 1e-12", total));

    std::erase_if(pmf, [](const PmfEntry& e) { return e.p == 0.0; });
    std::sort(pmf.begin(), pmf.end(), [](const PmfEntry& a, const PmfEntry& b) { return a.site < b.site; });
    for (std::size_t i = 1; i < pmf.size(); ++i)
        if (pmf[i].site == pmf[i - 1].site)
            throw std::invalid_argument("pmf lists the same site twice");

    IncrementLaw law;
    law.kind_ = LawKind::finite_custom;
    law.dimension_ = dimension;
    law.name_ = "custom";
    if (checks == LawChecks::strict) check_strongly_aperiodic(dimension, pmf);
    if (dimension == 2) {
        const Covariance c = moment_covariance(pmf);
        if (checks == LawChecks::strict && c.determinant() <= 1e-12)
            throw std::invalid_argument("covariance matrix is singular");
        law.covariance_ = c;
    }
    law.table_ = std::move(pmf);
    law.build_sampler();
    return law;
}

IncrementLaw IncrementLaw::truncated_zipf1d(int max_step) {
    if (max_step < 1) throw std::invalid_argument("truncation must be >= 1");
    double total = 0.0;
    for (int k = 1; k <= max_step; ++k) total += 2.0 / (static_cast<double>(k) * k);
    std::vector<PmfEntry> pmf;
    for (int k = -max_step; k <= max_step; ++k)
        if (k != 0) pmf.push_back({{k, 0}, 1.0 / (static_cast<double>(k) * k) / total});
    // K = 1 is the periodic +-1 walk; keep it constructible for diagnostics
    IncrementLaw law = finite_custom(1, std::move(pmf),
                                     max_step == 1 ? LawChecks::allow_lattice_periodic : LawChecks::strict);
    law.name_ = fmt::format("zipf1d-trunc:{}", max_step);
    law.truncation_ = max_step;
    return law;
}

void IncrementLaw::build_sampler() {
    cumulative_.resize(table_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < table_.size(); ++i) {
        acc += table_[i].p;
        cumulative_[i] = acc;
    }
    cumulative_.back() = 1.0;
}

std::int64_t IncrementLaw::max_step() const {
    if (kind_ == LawKind::zipf1d) throw std::logic_error("zipf1d has unbounded support");
    std::int64_t m = 0;
    for (const auto& e : table_) m = std::max({m, std::abs(e.site.x), std::abs(e.site.y)});
    return m;
}

double IncrementLaw::pmf(Site x) const {
    if (kind_ == LawKind::zipf1d) {
        if (x.y != 0 || x.x == 0) return 0.0;
        const double k = static_cast<double>(x.x);
        return 3.0 / (kPi * kPi * k * k);
    }
    auto it = std::lower_bound(table_.begin(), table_.end(), x,
                               [](const PmfEntry& e, Site s) { return e.site < s; });
    return (it != table_.end() && it->site == x) ? it->p : 0.0;
}

bool IncrementLaw::is_symmetric() const {
    if (kind_ != LawKind::finite_custom) return true;
    for (const auto& e : table_)
        if (std::abs(pmf(-e.site) - e.p) > 1e-15) return false;
    return true;
}

Site IncrementLaw::sample(Engine& rng) const {
    if (kind_ == LawKind::zipf1d) {
        const bool negative = (rng() >> 63) != 0;
        const std::int64_t k = zipf_magnitude(uniform_open0(rng));
        return {negative ? -k : k, 0};
    }
    const double u = uniform01(rng);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cumulative_.begin(), static_cast<std::ptrdiff_t>(table_.size()) - 1));
    return table_[idx].site;
}

std::complex<double> IncrementLaw::charfn(double t1, double t2) const {
    auto in_j = [](double t) { return t >= -kPi && t < kPi; };
    if (!in_j(t1) || !in_j(t2)) throw std::invalid_argument("charfn: t outside J = [-pi, pi)^d");
    if (dimension_ == 1 && t2 != 0.0) throw std::invalid_argument("charfn: second coordinate for a 1-d law");
    if (kind_ == LawKind::zipf1d) {
        const double a = std::abs(t1);
        return {1.0 - 3.0 / kPi * a + 1.5 / (kPi * kPi) * a * a, 0.0};
    }
    if (kind_ == LawKind::lazy_srw_2d) return {0.5 + 0.25 * (std::cos(t1) + std::cos(t2)), 0.0};
    double re = 0.0, im = 0.0;
    for (const auto& e : table_) {
        const double phase = t1 * static_cast<double>(e.site.x) + t2 * static_cast<double>(e.site.y);
        re += e.p * std::cos(phase);
        im += e.p * std::sin(phase);
    }
    return {re, im};
}

nlohmann::json IncrementLaw::to_json() const {
    nlohmann::json j;
    j["kind"] = std::string(to_string(kind_));
    j["parameters"] = nlohmann::json::object();
    if (kind_ == LawKind::finite_custom) {
        auto& p = j["parameters"];
        p["dimension"] = dimension_;
        nlohmann::json table = nlohmann::json::array();
        for (const auto& e : table_) {
            nlohmann::json site = dimension_ == 1 ? nlohmann::json::array({e.site.x})
                                                  : nlohmann::json::array({e.site.x, e.site.y});
            table.push_back({{"site", site}, {"p", e.p}});
        }
        p["pmf"] = table;
        if (truncation_ > 0) p["label"] = name_;
    }
    return j;
}

IncrementLaw IncrementLaw::from_json(const nlohmann::json& d) {
    if (!d.is_object() || !d.contains("kind") || !d["kind"].is_string())
        throw std::invalid_argument("law descriptor: field 'kind' missing or not a string");
    const std::string kind = d["kind"].get<std::string>();
    if (kind == "zipf1d") return zipf1d();
    if (kind == "lazy_srw_2d" || kind == "lazy2d") return lazy_srw_2d();
    if (kind != "finite_custom") throw std::invalid_argument("law descriptor: unknown kind '" + kind + "'");
    if (!d.contains("parameters") || !d["parameters"].is_object())
        throw std::invalid_argument("law descriptor: field 'parameters' missing or not an object");
    const auto& p = d["parameters"];
    if (!p.contains("dimension") || !p["dimension"].is_number_integer())
        throw std::invalid_argument("law descriptor: field 'parameters.dimension' missing or not an integer");
    const int dim = p["dimension"].get<int>();
    if (!p.contains("pmf") || !p["pmf"].is_array())
        throw std::invalid_argument("law descriptor: field 'parameters.pmf' missing or not an array");
    std::vector<PmfEntry> pmf;
    for (std::size_t i = 0; i < p["pmf"].size(); ++i) {
        const auto& e = p["pmf"][i];
        const std::string where = fmt::format("law descriptor: field 'parameters.pmf[{}]'", i);
        if (!e.is_object() || !e.contains("site") || !e["site"].is_array() || !e.contains("p") ||
            !e["p"].is_number())
            throw std::invalid_argument(where + " needs 'site' (array) and 'p' (number)");
        const auto& s = e["site"];
        if (static_cast<int>(s.size()) != dim)
            throw std::invalid_argument(fmt::format("{}.site has {} coordinates, law dimension is {}", where,
                                                    s.size(), dim));
        for (const auto& c : s)
            if (!c.is_number_integer()) throw std::invalid_argument(where + ".site has a non-integer coordinate");
        const Site site{s[0].get<std::int64_t>(), dim == 2 ? s[1].get<std::int64_t>() : 0};
        pmf.push_back({site, e["p"].get<double>()});
    }
    LawChecks checks = LawChecks::strict;
    if (p.contains("checks")) {
        const auto c = p["checks"].get<std::string>();
        if (c == "allow_lattice_periodic") checks = LawChecks::allow_lattice_periodic;
        else if (c != "strict") throw std::invalid_argument("law descriptor: unknown 'parameters.checks' value");
    }
    IncrementLaw law = finite_custom(dim, std::move(pmf), checks);
    if (p.contains("label") && p["label"].is_string()) {
        const auto label = p["label"].get<std::string>();
        if (label.rfind("zipf1d-trunc:", 0) == 0) {
            law.name_ = label;
            law.truncation_ = std::stoll(label.substr(13));
        }
    }
    return law;
}

IncrementLaw IncrementLaw::parse(std::string_view spec) {
    if (spec == "zipf1d") return zipf1d();
    if (spec == "lazy2d" || spec == "lazy_srw_2d") return lazy_srw_2d();
    if (spec.rfind("zipf1d-trunc:", 0) == 0) {
        const std::string k(spec.substr(13));
        std::size_t used = 0;
        int value = 0;
        try {
            value = std::stoi(k, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != k.size() || k.empty()) throw std::invalid_argument("bad truncation in law spec '" + std::string(spec) + "'");
        return truncated_zipf1d(value);
    }
    if (spec.rfind("custom:", 0) == 0) {
        const std::string path(spec.substr(7));
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open law file '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw std::invalid_argument("law file '" + path + "': " + e.what());
        }
        try {
            return from_json(j);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("law file '" + path + "': " + e.what());
        }
    }
    throw std::invalid_argument("unknown law spec '" + std::string(spec) + "' (expected zipf1d, lazy2d, "
                                "zipf1d-trunc:K or custom:<file>)");
}

double aperiodicity_witness(const IncrementLaw& law, int grid_size) {
    if (grid_size < 64) throw std::invalid_argument("aperiodicity_witness: grid_size must be >= 64");
    const double h = 2.0 * kPi / grid_size;
    const double delta = h;
    double best = 0.0;
    auto coord = [&](int i) { return -kPi + h * i; };
    if (law.dimension() == 1) {
        for (int i = 0; i < grid_size; ++i) {
            const double t = coord(i);
            if (std::abs(t) < delta * (1 - 1e-12)) continue;
            best = std::max(best, std::abs(law.charfn(t)));
        }
        return best;
    }
    for (int i = 0; i < grid_size; ++i)
        for (int j = 0; j < grid_size; ++j) {
            const double t1 = coord(i), t2 = coord(j);
            if (std::hypot(t1, t2) < delta * (1 - 1e-12)) continue;
            best = std::max(best, std::abs(law.charfn(t1, t2)));
        }
    return best;
}

GammaEstimate gamma_from_charfn(const IncrementLaw& law, std::span<const double> ts) {
    if (ts.size() < 2) throw std::invalid_argument("gamma_from_charfn: need at least two t values");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!(ts[i] > 0.0)) throw std::invalid_argument("gamma_from_charfn: t values must be positive");
        if (i > 0 && !(ts[i] < ts[i - 1]))
            throw std::invalid_argument("gamma_from_charfn: t sequence must decrease");
    }
    GammaEstimate out;
    for (double t : ts) out.ratios.push_back((1.0 - law.charfn(t).real()) / t);
    // r(t) = gamma + c t + o(t): eliminate c between the last two points
    const std::size_t m = ts.size();
    const double t1 = ts[m - 2], t2 = ts[m - 1];
    const double r1 = out.ratios[m - 2], r2 = out.ratios[m - 1];
    out.estimate = (r2 * t1 - r1 * t2) / (t1 - t2);
    // A Cauchy component keeps the ratios bounded away from zero; finite
    // variance laws send them to zero linearly in t.
    const double scale = std::max(std::abs(r1), std::abs(r2));
    out.converged = scale > 0.0 && std::abs(out.estimate) > 1e-3 * scale + 1e-9;
    if (!out.converged) out.estimate = 0.0;
    return out;
}

}  // namespace silt
