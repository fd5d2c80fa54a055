#include "silt/cubature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <vector>

#include "silt/rng.hpp"

namespace silt {

namespace {

// Kronrod abscissae on [0, 1] (x_k15[1], x_k15[3], x_k15[5] are Gauss nodes).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Rule15 {
    std::array<double, 15> node{};    // on [-1, 1]
    std::array<double, 15> kronrod{};
    std::array<double, 15> gauss{};   // zero at non-Gauss nodes
};

constexpr Rule15 make_rule() {
    Rule15 r{};
    for (int i = 0; i < 7; ++i) {
        r.node[i] = -kXgk[i];
        r.node[14 - i] = kXgk[i];
        r.kronrod[i] = r.kronrod[14 - i] = kWgk[i];
    }
    r.node[7] = 0.0;
    r.kronrod[7] = kWgk[7];
    // Gauss nodes are kXgk[1], [3], [5] and the centre
    r.gauss[1] = r.gauss[13] = kWg[0];
    r.gauss[3] = r.gauss[11] = kWg[1];
    r.gauss[5] = r.gauss[9] = kWg[2];
    r.gauss[7] = kWg[3];
    return r;
}

constexpr Rule15 kRule = make_rule();
constexpr double kEps = std::numeric_limits<double>::epsilon();

double quadpack_error(double diff, double resasc, double resabs) {
    double err = std::abs(diff);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    if (resabs > std::numeric_limits<double>::min() / (50 * kEps)) err = std::max(50 * kEps * resabs, err);
    return err;
}

struct Segment {
    double a, b, value, error;
    std::size_t id;
};

Segment gk15(const Integrand1d& f, double a, double b, std::size_t id) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::array<double, 15> fv{};
    double k = 0, g = 0, abs_k = 0;
    for (int i = 0; i < 15; ++i) {
        fv[i] = f(c + h * kRule.node[i]);
        k += kRule.kronrod[i] * fv[i];
        g += kRule.gauss[i] * fv[i];
        abs_k += kRule.kronrod[i] * std::abs(fv[i]);
    }
    const double mean = 0.5 * k;
    double asc = 0;
    for (int i = 0; i < 15; ++i) asc += kRule.kronrod[i] * std::abs(fv[i] - mean);
    const double ah = std::abs(h);
    return {a, b, k * h, quadpack_error((k - g) * h, asc * ah, abs_k * ah), id};
}

struct Region {
    Rect box;
    double value, error;
    int split_axis;
    std::size_t id;
};

Region gk15x15(const Integrand2d& f, const Rect& r, std::size_t id) {
    const double cx = 0.5 * (r.x0 + r.x1), hx = 0.5 * (r.x1 - r.x0);
    const double cy = 0.5 * (r.y0 + r.y1), hy = 0.5 * (r.y1 - r.y0);
    std::array<std::array<double, 15>, 15> fv{};
    double kk = 0, gk = 0, kg = 0, abs_k = 0;
    for (int i = 0; i < 15; ++i) {
        const double x = cx + hx * kRule.node[i];
        for (int j = 0; j < 15; ++j) {
            const double v = f(x, cy + hy * kRule.node[j]);
            fv[i][j] = v;
            kk += kRule.kronrod[i] * kRule.kronrod[j] * v;
            gk += kRule.gauss[i] * kRule.kronrod[j] * v;
            kg += kRule.kronrod[i] * kRule.gauss[j] * v;
            abs_k += kRule.kronrod[i] * kRule.kronrod[j] * std::abs(v);
        }
    }
    const double mean = 0.25 * kk;
    double asc = 0;
    for (int i = 0; i < 15; ++i)
        for (int j = 0; j < 15; ++j) asc += kRule.kronrod[i] * kRule.kronrod[j] * std::abs(fv[i][j] - mean);
    const double area = std::abs(hx * hy);
    const double ex = quadpack_error((kk - gk) * hx * hy, asc * area, abs_k * area);
    const double ey = quadpack_error((kk - kg) * hx * hy, asc * area, abs_k * area);
    return {r, kk * hx * hy, ex + ey, ex >= ey ? 0 : 1, id};
}

// Neumaier-compensated sum in a fixed order.
template <class It, class Get>
double ordered_sum(It first, It last, Get get) {
    double sum = 0.0, comp = 0.0;
    for (; first != last; ++first) {
        const double v = get(*first);
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + comp;
}

}  // namespace

QuadratureResult integrate_1d(const Integrand1d& f, double a, double b, const QuadratureOptions& opt) {
    auto worse = [](const Segment& x, const Segment& y) { return x.error < y.error || (x.error == y.error && x.id > y.id); };
    std::priority_queue<Segment, std::vector<Segment>, decltype(worse)> heap(worse);
    std::size_t next_id = 0, evals = 15;
    heap.push(gk15(f, a, b, next_id++));
    double value = heap.top().value, error = heap.top().error;
    while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value)) && evals + 30 <= opt.max_evaluations) {
        const Segment s = heap.top();
        heap.pop();
        const double mid = 0.5 * (s.a + s.b);
        if (!(mid > s.a && mid < s.b)) {  // interval at resolution limit
            heap.push(s);
            break;
        }
        const Segment l = gk15(f, s.a, mid, next_id++);
        const Segment r = gk15(f, mid, s.b, next_id++);
        evals += 30;
        value += l.value + r.value - s.value;
        error += l.error + r.error - s.error;
        heap.push(l);
        heap.push(r);
    }
    std::vector<Segment> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const Segment& x, const Segment& y) { return x.id < y.id; });
    QuadratureResult out;
    out.value = ordered_sum(all.begin(), all.end(), [](const Segment& s) { return s.value; });
    out.error_estimate = ordered_sum(all.begin(), all.end(), [](const Segment& s) { return s.error; });
    out.evaluations = evals;
    out.converged = out.error_estimate <= std::max(opt.abs_tol, opt.rel_tol * std::abs(out.value));
    return out;
}

QuadratureResult integrate_2d(const Integrand2d& f, const Rect& box, const QuadratureOptions& opt) {
    auto worse = [](const Region& x, const Region& y) { return x.error < y.error || (x.error == y.error && x.id > y.id); };
    std::priority_queue<Region, std::vector<Region>, decltype(worse)> heap(worse);
    std::size_t next_id = 0, evals = 225;
    heap.push(gk15x15(f, box, next_id++));
    double value = heap.top().value, error = heap.top().error;
    std::size_t steps = 0;
    while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value)) && evals + 450 <= opt.max_evaluations) {
        const Region r = heap.top();
        heap.pop();
        Rect lo = r.box, hi = r.box;
        if (r.split_axis == 0) {
            const double mid = 0.5 * (r.box.x0 + r.box.x1);
            lo.x1 = hi.x0 = mid;
        } else {
            const double mid = 0.5 * (r.box.y0 + r.box.y1);
            lo.y1 = hi.y0 = mid;
        }
        const Region a = gk15x15(f, lo, next_id++);
        const Region b = gk15x15(f, hi, next_id++);
        evals += 450;
        value += a.value + b.value - r.value;
        error += a.error + b.error - r.error;
        heap.push(a);
        heap.push(b);
        // running sums drift; refresh them from the heap now and then
        if (++steps % 4096 == 0) {
            auto copy = heap;
            double v = 0, e = 0;
            while (!copy.empty()) {
                v += copy.top().value;
                e += copy.top().error;
                copy.pop();
            }
            value = v;
            error = e;
        }
    }
    std::vector<Region> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const Region& x, const Region& y) { return x.id < y.id; });
    QuadratureResult out;
    out.value = ordered_sum(all.begin(), all.end(), [](const Region& s) { return s.value; });
    out.error_estimate = ordered_sum(all.begin(), all.end(), [](const Region& s) { return s.error; });
    out.evaluations = evals;
    out.converged = out.error_estimate <= std::max(opt.abs_tol, opt.rel_tol * std::abs(out.value));
    return out;
}

QuadratureResult lattice_rule_2d(const Integrand2d& f, const LatticeRuleOptions& opt) {
    if (opt.fibonacci_index < 3 || opt.fibonacci_index > 45) throw std::invalid_argument("fibonacci_index out of range");
    if (opt.shifts < 2) throw std::invalid_argument("lattice_rule_2d needs at least two shifts");
    std::uint64_t fprev = 1, fcur = 1;  // F_1, F_2
    for (int i = 2; i < opt.fibonacci_index; ++i) {
        const std::uint64_t next = fprev + fcur;
        fprev = fcur;
        fcur = next;
    }
    const std::uint64_t n = fcur, g = fprev;
    constexpr double two_pi = 2.0 * std::numbers::pi;
    auto warp = [&](double t, double& w) {
        if (!opt.periodize) {
            w = 1.0;
            return t;
        }
        w = 1.0 - std::cos(two_pi * t);
        return t - std::sin(two_pi * t) / two_pi;
    };
    Engine rng = make_engine(opt.seed);
    std::vector<double> estimates;
    for (int s = 0; s < opt.shifts; ++s) {
        const double sx = uniform01(rng), sy = uniform01(rng);
        double sum = 0.0, comp = 0.0;
        for (std::uint64_t i = 0; i < n; ++i) {
            double x = static_cast<double>(i) / static_cast<double>(n) + sx;
            double y = static_cast<double>((i * g) % n) / static_cast<double>(n) + sy;
            x -= std::floor(x);
            y -= std::floor(y);
            double wx, wy;
            const double u = warp(x, wx), v = warp(y, wy);
            const double w = wx * wy;
            const double val = w == 0.0 ? 0.0 : f(u, v) * w;
            const double t = sum + val;
            comp += std::abs(sum) >= std::abs(val) ? (sum - t) + val : (val - t) + sum;
            sum = t;
        }
        estimates.push_back((sum + comp) / static_cast<double>(n));
    }
    double mean = 0;
    for (double e : estimates) mean += e;
    mean /= static_cast<double>(estimates.size());
    double var = 0;
    for (double e : estimates) var += (e - mean) * (e - mean);
    var /= static_cast<double>(estimates.size() - 1);
    QuadratureResult out;
    out.value = mean;
    out.error_estimate = std::sqrt(var / static_cast<double>(estimates.size()));
    out.evaluations = static_cast<std::size_t>(n) * static_cast<std::size_t>(opt.shifts);
    out.converged = true;
    return out;
}

}  // namespace silt
