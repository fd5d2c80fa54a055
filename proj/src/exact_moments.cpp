#include "silt/exact_moments.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <stdexcept>

#include "silt/errors.hpp"
#include "silt/fourier.hpp"
#include "silt/parallel.hpp"

namespace silt {

namespace {

std::size_t cell_index(Site x, std::int64_t radius, int dimension) {
    const std::int64_t side = 2 * radius + 1;
    if (dimension == 1) return static_cast<std::size_t>(x.x + radius);
    return static_cast<std::size_t>((x.y + radius) * side + (x.x + radius));
}

struct Neumaier {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

LatticePmf delta(int dimension, std::int64_t radius) {
    LatticePmf p{dimension, radius, {}, 0.0};
    const auto side = static_cast<std::size_t>(p.side());
    p.mass.assign(dimension == 1 ? side : side * side, 0.0);
    p.mass[cell_index({0, 0}, radius, dimension)] = 1.0;
    return p;
}

// next = prev (*) step restricted to the box; `reach` bounds the support of prev.
LatticePmf convolve_step(const LatticePmf& prev, const std::vector<PmfEntry>& step, std::int64_t reach,
                         bool symmetric) {
    LatticePmf next{prev.dimension, prev.radius, std::vector<double>(prev.mass.size(), 0.0), 0.0};
    const std::int64_t R = prev.radius;
    const std::int64_t lim = std::min(reach, R);
    const int d = prev.dimension;
    const std::int64_t ylim = d == 1 ? 0 : lim;
    for (std::int64_t y = -ylim; y <= ylim; ++y) {
        for (std::int64_t x = -lim; x <= lim; ++x) {
            const double w = prev.mass[cell_index({x, y}, R, d)];
            if (w == 0.0) continue;
            for (const PmfEntry& e : step) {
                const Site t{x + e.site.x, y + e.site.y};
                if (std::abs(t.x) > R || std::abs(t.y) > R) continue;
                next.mass[cell_index(t, R, d)] += w * e.p;
            }
        }
    }
    if (symmetric) {
        // cell i and cell size-1-i are mirror images; share one rounded value
        const std::size_t size = next.mass.size();
        for (std::size_t i = 0; i < size / 2; ++i) {
            const double m = 0.5 * (next.mass[i] + next.mass[size - 1 - i]);
            next.mass[i] = m;
            next.mass[size - 1 - i] = m;
        }
    }
    Neumaier s;
    for (double v : next.mass) s.add(v);
    next.deficit = std::max(0.0, 1.0 - s.value());
    return next;
}

std::vector<PmfEntry> zipf_window(std::int64_t box) {
    std::vector<PmfEntry> out;
    const double c = 3.0 / (std::numbers::pi * std::numbers::pi);
    for (std::int64_t k = -box; k <= box; ++k)
        if (k != 0) out.push_back({{k, 0}, c / static_cast<double>(k * k)});
    return out;
}

double zipf_charfn_closed(double t) {
    const double a = std::abs(t);
    const double pi = std::numbers::pi;
    return 1.0 - 3.0 * a / pi + 3.0 * a * a / (2.0 * pi * pi);
}

void check_cap(int n, const ExactOptions& opt) {
    if (n < 0) throw std::invalid_argument("n must be non-negative");
    if (n > opt.n_cap) throw std::invalid_argument(fmt::format("n = {} exceeds the exact-moment cap {}", n, opt.n_cap));
}

}  // namespace

double LatticePmf::at(Site x) const noexcept {
    if (std::abs(x.x) > radius || (dimension == 2 && std::abs(x.y) > radius) || (dimension == 1 && x.y != 0))
        return 0.0;
    return mass[cell_index(x, radius, dimension)];
}

double LatticePmf::total() const noexcept {
    Neumaier s;
    for (double v : mass) s.add(v);
    return s.value();
}

std::vector<LatticePmf> convolution_powers(const IncrementLaw& law, int k_max, std::int64_t box, double eps_mass,
                                           const ExactOptions& opt) {
    if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
    if (box < 1) throw std::invalid_argument("box radius must be positive");
    const int d = law.dimension();
    std::vector<PmfEntry> step;
    std::int64_t radius = box;
    std::int64_t reach_per_step = 0;
    if (law.has_finite_support()) {
        reach_per_step = law.max_step();
        radius = std::max(box, reach_per_step * k_max);
        if (radius > opt.max_box) throw BudgetError(fmt::format("box radius {} needed; raise max_box", radius));
        step.assign(law.support().begin(), law.support().end());
    } else {
        // the folded tail of one step is a lower bound for every later deficit
        while (zipf_tail(radius + 1) > eps_mass) {
            if (2 * radius > opt.max_box)
                throw BudgetError(fmt::format("zipf1d tail mass {:.3e} beyond box {} exceeds eps_mass {:.1e}; use a larger box",
                                              zipf_tail(radius + 1), radius, eps_mass));
            radius *= 2;
        }
        step = zipf_window(radius);
        reach_per_step = radius;
    }
    std::vector<LatticePmf> out;
    out.reserve(static_cast<std::size_t>(k_max));
    const bool symmetric = law.is_symmetric();
    LatticePmf cur = delta(d, radius);
    for (int k = 1; k <= k_max; ++k) {
        cur = convolve_step(cur, step, reach_per_step * (k - 1), symmetric);
        if (cur.deficit > eps_mass)
            throw BudgetError(fmt::format("deficit {:.3e} at k = {} exceeds eps_mass; use a larger box", cur.deficit, k));
        out.push_back(cur);
    }
    return out;
}

std::vector<double> zipf_return_probabilities(int k_max) {
    if (k_max < 0) throw std::invalid_argument("k_max must be non-negative");
    std::vector<double> p(static_cast<std::size_t>(k_max) + 1);
    p[0] = 1.0;
    for (int k = 1; k <= k_max; ++k)
        p[k] = (1.0 - static_cast<double>(k) * p[k - 1]) / static_cast<double>(2 * k + 1);
    return p;
}

std::vector<double> return_probabilities(const IncrementLaw& law, int k_max) {
    if (k_max < 0) throw std::invalid_argument("k_max must be non-negative");
    if (law.kind() == LawKind::zipf1d) return zipf_return_probabilities(k_max);
    std::vector<double> out(static_cast<std::size_t>(k_max) + 1);
    out[0] = 1.0;
    if (k_max == 0) return out;
    if ((law.dimension() == 1 && k_max > 4096) || (law.dimension() == 2 && k_max > 256)) {
        for (int k = 1; k <= k_max; ++k) {
            const QuadratureResult q = return_probability_quadrature(law, k);
            if (!q.converged) throw BudgetError(fmt::format("return probability quadrature failed at k = {}", k));
            out[k] = q.value;
        }
        return out;
    }
    const std::int64_t step = law.max_step();
    const std::int64_t radius = step * k_max;
    const std::vector<PmfEntry> support(law.support().begin(), law.support().end());
    LatticePmf cur = delta(law.dimension(), radius);
    for (int k = 1; k <= k_max; ++k) {
        cur = convolve_step(cur, support, step * (k - 1), law.is_symmetric());
        out[k] = cur.at({0, 0});
    }
    return out;
}

QuadratureResult return_probability_quadrature(const IncrementLaw& law, int k, double rel_tol) {
    if (k < 0) throw std::invalid_argument("k must be non-negative");
    const double pi = std::numbers::pi;
    QuadratureOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = 1e-17;
    if (law.dimension() == 1) {
        auto f = [&](double t) { return std::pow(law.charfn(t), k).real(); };
        QuadratureResult lo = integrate_1d(f, -pi, 0.0, opt);
        QuadratureResult hi = integrate_1d(f, 0.0, pi, opt);
        return {(lo.value + hi.value) / (2 * pi), (lo.error_estimate + hi.error_estimate) / (2 * pi),
                lo.evaluations + hi.evaluations, lo.converged && hi.converged};
    }
    auto f = [&](double s, double t) { return std::pow(law.charfn(s, t), k).real(); };
    QuadratureResult total{0.0, 0.0, 0, true};
    for (int qx = 0; qx < 2; ++qx)
        for (int qy = 0; qy < 2; ++qy) {
            const Rect r{qx == 0 ? -pi : 0.0, qx == 0 ? 0.0 : pi, qy == 0 ? -pi : 0.0, qy == 0 ? 0.0 : pi};
            const QuadratureResult q = integrate_2d(f, r, opt);
            total.value += q.value;
            total.error_estimate += q.error_estimate;
            total.evaluations += q.evaluations;
            total.converged = total.converged && q.converged;
        }
    total.value /= 4 * pi * pi;
    total.error_estimate /= 4 * pi * pi;
    return total;
}

double expected_Vn_from(const std::vector<double>& origin, std::int64_t n) {
    if (n < 0) throw std::invalid_argument("n must be non-negative");
    if (origin.size() < static_cast<std::size_t>(n) + 1) throw std::invalid_argument("not enough return probabilities");
    Neumaier s;
    for (std::int64_t k = 1; k <= n; ++k) s.add(static_cast<double>(n + 1 - k) * origin[static_cast<std::size_t>(k)]);
    return static_cast<double>(n + 1) + 2.0 * s.value();
}

double expected_Vn(const IncrementLaw& law, std::int64_t n) {
    if (n < 0) throw std::invalid_argument("n must be non-negative");
    if (n > (1LL << 30)) throw std::invalid_argument("n too large for the exact expectation");
    return expected_Vn_from(return_probabilities(law, static_cast<int>(n)), n);
}

ReturnTables ReturnTables::build(const IncrementLaw& law, int k_max, const ExactOptions& opt) {
    if (k_max < 0) throw std::invalid_argument("k_max must be non-negative");
    ReturnTables t;
    t.dimension_ = law.dimension();
    t.k_max_ = k_max;
    if (law.has_finite_support()) {
        t.step_ = law.max_step();
        t.radius_ = std::max<std::int64_t>(1, t.step_ * k_max);
        t.tables_.push_back(delta(t.dimension_, t.radius_).mass);
        if (k_max > 0) {
            ExactOptions o = opt;
            o.max_box = std::max(opt.max_box, t.radius_);
            for (LatticePmf& p : convolution_powers(law, k_max, t.radius_, opt.eps_mass, o))
                t.tables_.push_back(std::move(p.mass));
        }
        const std::size_t centre = cell_index({0, 0}, t.radius_, t.dimension_);
        for (const auto& tab : t.tables_) t.origin_.push_back(tab[centre]);
        return t;
    }
    if (law.kind() != LawKind::zipf1d) throw std::invalid_argument("unsupported law for return tables");
    if (opt.fourier_log2_points < 8 || opt.fourier_log2_points > 24)
        throw std::invalid_argument("fourier_log2_points must lie in [8, 24]");
    const std::size_t n_points = std::size_t{1} << opt.fourier_log2_points;
    t.step_ = 0;
    t.radius_ = static_cast<std::int64_t>(n_points / 2);
    std::vector<double> base(n_points / 2 + 1), spectrum(n_points / 2 + 1, 1.0);
    for (std::size_t j = 0; j < base.size(); ++j)
        base[j] = zipf_charfn_closed(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_points));
    EvenSpectrumInverter inverter(n_points);
    std::vector<double> unit(n_points, 0.0);
    unit[0] = 1.0;
    t.tables_.push_back(std::move(unit));
    for (int k = 1; k <= k_max; ++k) {
        for (std::size_t j = 0; j < base.size(); ++j) spectrum[j] *= base[j];
        t.tables_.push_back(inverter.invert(spectrum));
    }
    t.origin_ = zipf_return_probabilities(k_max);
    // mass of the periodic images, dominated by the two nearest ones
    const double n2 = static_cast<double>(n_points) * static_cast<double>(n_points);
    t.deficit_ = 2.0 * 6.0 * k_max / (std::numbers::pi * std::numbers::pi * n2);
    return t;
}

double ReturnTables::overlap(int a, int b, int c) const {
    if (a < 0 || b < 0 || c < 0 || a > k_max_ || b > k_max_ || c > k_max_)
        throw std::out_of_range("overlap index outside the tables");
    const auto& pa = tables_[a];
    const auto& pb = tables_[b];
    const auto& pc = tables_[c];
    Neumaier s;
    if (step_ == 0) {  // cyclic FFT table
        const std::size_t n = pa.size();
        s.add(pa[0] * pb[0] * pc[0]);
        for (std::size_t x = 1; x < n; ++x) s.add(pa[x] * pb[n - x] * pc[x]);
        return s.value();
    }
    const std::int64_t lim = step_ * std::min({a, b, c});
    const std::int64_t R = radius_;
    const std::size_t last = pa.size() - 1;  // index of -x is last - index of x
    const std::int64_t ylim = dimension_ == 1 ? 0 : lim;
    for (std::int64_t y = -ylim; y <= ylim; ++y)
        for (std::int64_t x = -lim; x <= lim; ++x) {
            const std::size_t i = cell_index({x, y}, R, dimension_);
            s.add(pa[i] * pb[last - i] * pc[i]);
        }
    return s.value();
}

DecompositionProfile DecompositionProfile::compute(const ReturnTables& tables, int n_max, unsigned workers) {
    if (n_max < 0 || n_max > tables.k_max()) throw std::invalid_argument("n_max exceeds the table depth");
    DecompositionProfile prof;
    prof.n_max_ = n_max;
    const auto len = static_cast<std::size_t>(n_max) + 1;
    prof.a2_.assign(len, 0.0);
    prof.a3_.assign(len, 0.0);
    prof.b2_.assign(len, 0.0);
    prof.b3_.assign(len, 0.0);
    const std::vector<double>& p = tables.origins();
    parallel_for(static_cast<std::size_t>(n_max), workers, [&](std::size_t idx) {
        const int r = static_cast<int>(idx) + 1;
        Neumaier a3, b2, a2, b3;
        for (int m3 = 1; m3 <= r; ++m3) {
            const double term = p[m3] * (p[r - m3] - p[r]);
            a3.add(static_cast<double>(r - m3 + 1) * term);
            b2.add(static_cast<double>(r - m3) * term);
            for (int m4 = 1; m4 <= r - m3; ++m4) {
                const int m2 = r - m3 - m4;
                const double v = tables.overlap(m2, m3, m4) - p[m2 + m3] * p[m3 + m4];
                a2.add(v);
                if (m2 > 0) b3.add(v);
            }
        }
        prof.a3_[r] = a3.value();
        prof.b2_[r] = b2.value();
        prof.a2_[r] = a2.value();
        prof.b3_[r] = b3.value();
    });
    return prof;
}

VarianceDecomposition DecompositionProfile::at(int n) const {
    if (n < 0 || n > n_max_) throw std::out_of_range("n outside the computed profile");
    Neumaier a2, a3, b2, b3;
    for (int r = 1; r <= n; ++r) {
        const double w = static_cast<double>(n + 1 - r);
        a2.add(w * a2_[r]);
        a3.add(w * a3_[r]);
        b2.add(w * b2_[r]);
        b3.add(w * b3_[r]);
    }
    return {n, a2.value(), a3.value(), b2.value(), b3.value()};
}

VarianceDecomposition variance_exact(const IncrementLaw& law, int n, const ExactOptions& opt) {
    check_cap(n, opt);
    if (n == 0) return {};
    const ReturnTables tables = ReturnTables::build(law, n, opt);
    return DecompositionProfile::compute(tables, n, opt.workers).at(n);
}

double a3_exact(const IncrementLaw& law, int n, const ExactOptions& opt) { return variance_exact(law, n, opt).a3; }

double a2_exact(const IncrementLaw& law, int n, const ExactOptions& opt) { return variance_exact(law, n, opt).a2; }

std::array<double, 2> b2_b3_exact(const IncrementLaw& law, int n, const ExactOptions& opt) {
    const VarianceDecomposition v = variance_exact(law, n, opt);
    return {v.b2, v.b3};
}

std::vector<VarianceDecomposition> variance_profile(const IncrementLaw& law, int n_max, const ExactOptions& opt) {
    check_cap(n_max, opt);
    std::vector<VarianceDecomposition> out(1);
    if (n_max == 0) return out;
    const ReturnTables tables = ReturnTables::build(law, n_max, opt);
    const DecompositionProfile prof = DecompositionProfile::compute(tables, n_max, opt.workers);
    for (int n = 1; n <= n_max; ++n) out.push_back(prof.at(n));
    return out;
}

IndexSet classify(int i1, int j1, int i2, int j2) {
    if (i1 <= i2) {
        if (j1 <= i2) return IndexSet::A1;
        return j1 < j2 ? IndexSet::A2 : IndexSet::A3;
    }
    if (j2 <= i1) return IndexSet::B1;
    return j1 <= j2 ? IndexSet::B2 : IndexSet::B3;
}

EnumerationResult variance_enumeration(const IncrementLaw& law, int n) {
    if (!law.has_finite_support()) throw std::invalid_argument("path enumeration needs a finite-support law");
    if (n < 0 || n > 10) throw std::invalid_argument("path enumeration supports 0 <= n <= 10");
    const std::vector<PmfEntry> support(law.support().begin(), law.support().end());
    const double paths = std::pow(static_cast<double>(support.size()), n);
    if (paths > 2e7) throw BudgetError(fmt::format("{:.3g} paths exceed the enumeration budget", paths));

    const int m = n + 1;
    auto pair_id = [m](int i, int j) { return static_cast<std::size_t>(i * m + j); };
    std::vector<int> pair_i, pair_j;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            pair_i.push_back(i);
            pair_j.push_back(j);
        }
    const std::size_t npairs = pair_i.size();
    std::vector<std::uint8_t> cls(npairs * npairs);
    for (std::size_t p = 0; p < npairs; ++p)
        for (std::size_t q = 0; q < npairs; ++q)
            cls[p * npairs + q] = static_cast<std::uint8_t>(classify(pair_i[p], pair_j[p], pair_i[q], pair_j[q]));
    std::vector<std::size_t> pair_index(static_cast<std::size_t>(m * m), 0);
    for (std::size_t p = 0; p < npairs; ++p) pair_index[pair_id(pair_i[p], pair_j[p])] = p;

    std::vector<long double> q_prob(npairs, 0.0L);
    std::array<long double, 6> joint{};
    long double mean = 0.0L, second = 0.0L;
    std::vector<Site> sites(static_cast<std::size_t>(m));
    std::vector<double> weight(static_cast<std::size_t>(m), 1.0);
    std::vector<std::size_t> choice(static_cast<std::size_t>(m), 0);
    std::vector<std::size_t> matched;
    matched.reserve(npairs);

    auto leaf = [&] {
        const long double w = weight[static_cast<std::size_t>(n)];
        matched.clear();
        for (int j = 1; j < m; ++j)
            for (int i = 0; i < j; ++i)
                if (sites[i] == sites[j]) matched.push_back(pair_index[pair_id(i, j)]);
        const long double v = static_cast<long double>(m + 2 * matched.size());
        mean += w * v;
        second += w * v * v;
        for (std::size_t a : matched) {
            q_prob[a] += w;
            const std::uint8_t* row = &cls[a * npairs];
            for (std::size_t b : matched) joint[row[b]] += w;
        }
    };

    // depth-first walk over step choices
    sites[0] = {0, 0};
    if (n == 0) {
        leaf();
    } else {
        int depth = 1;
        choice[1] = 0;
        while (depth >= 1) {
            if (choice[depth] == support.size()) {
                --depth;
                if (depth >= 1) ++choice[depth];
                continue;
            }
            const PmfEntry& e = support[choice[depth]];
            sites[depth] = sites[depth - 1] + e.site;
            weight[depth] = weight[depth - 1] * e.p;
            if (depth == n) {
                leaf();
                ++choice[depth];
            } else {
                ++depth;
                choice[depth] = 0;
            }
        }
    }

    std::array<long double, 6> product{};
    for (std::size_t p = 0; p < npairs; ++p)
        for (std::size_t q = 0; q < npairs; ++q) product[cls[p * npairs + q]] += q_prob[p] * q_prob[q];

    EnumerationResult out;
    out.n = n;
    out.mean = static_cast<double>(mean);
    out.second_moment = static_cast<double>(second);
    for (std::size_t s = 0; s < 6; ++s) out.set_sums[s] = static_cast<double>(joint[s] - product[s]);
    return out;
}

}  // namespace silt
