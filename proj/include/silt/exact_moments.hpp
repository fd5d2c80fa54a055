#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "silt/cubature.hpp"
#include "silt/increment_laws.hpp"

namespace silt {

/// Distribution of S_k on the box {-B..B}^d, row-major with x fastest.
struct LatticePmf {
    int dimension = 1;
    std::int64_t radius = 0;
    std::vector<double> mass;
    double deficit = 0.0;

    std::int64_t side() const noexcept { return 2 * radius + 1; }
    double at(Site x) const noexcept;
    double total() const noexcept;
};

struct ExactOptions {
    double eps_mass = 1e-12;
    std::int64_t initial_box = 16;
    std::int64_t max_box = 1 << 14;
    int n_cap = 64;
    int fourier_log2_points = 18;
    unsigned workers = 1;
};

/// p_1 .. p_{k_max}. Finite laws get a box of k_max * max_step so the
/// deficit is exactly zero. zipf1d starts at opt.initial_box and doubles up
/// to opt.max_box; if the folded tail still exceeds eps_mass a BudgetError
/// is thrown.
std::vector<LatticePmf> convolution_powers(const IncrementLaw& law, int k_max, std::int64_t box, double eps_mass,
                                           const ExactOptions& opt = {});

/// p_k(0) for k = 0..k_max.
std::vector<double> return_probabilities(const IncrementLaw& law, int k_max);

/// p_k(0) for zipf1d from the integration-by-parts recurrence
/// I_k = (1 - k I_{k-1}) / (2k + 1), I_0 = 1, which is forward stable.
std::vector<double> zipf_return_probabilities(int k_max);

/// (2 pi)^{-d} times the integral of Re f^k over the torus.
QuadratureResult return_probability_quadrature(const IncrementLaw& law, int k, double rel_tol = 1e-12);

double expected_Vn(const IncrementLaw& law, std::int64_t n);
double expected_Vn_from(const std::vector<double>& origin, std::int64_t n);

/// Read-only tables of P(S_k = x) for k = 0..k_max. Finite laws use exact
/// convolution; zipf1d uses an FFT of f^k on 2^L points.
class ReturnTables {
public:
    static ReturnTables build(const IncrementLaw& law, int k_max, const ExactOptions& opt = {});

    int k_max() const noexcept { return k_max_; }
    double origin(int k) const { return origin_.at(static_cast<std::size_t>(k)); }
    const std::vector<double>& origins() const noexcept { return origin_; }
    /// sum_x p_a(x) p_b(-x) p_c(x)
    double overlap(int a, int b, int c) const;
    /// Largest mass missing from any table (0 for finite laws).
    double deficit() const noexcept { return deficit_; }

private:
    int dimension_ = 1;
    int k_max_ = 0;
    std::int64_t radius_ = 0;
    std::int64_t step_ = 0;  // per-step reach for finite laws, 0 if unbounded
    std::vector<std::vector<double>> tables_;
    std::vector<double> origin_;
    double deficit_ = 0.0;
};

struct VarianceDecomposition {
    std::int64_t n = 0;
    double a2 = 0.0;
    double a3 = 0.0;
    double b2 = 0.0;
    double b3 = 0.0;

    double var() const noexcept { return 4.0 * (a2 + a3 + b2 + b3); }
};

/// Per-gap-total aggregates c_r for each piece; any n <= n_max is then an
/// O(n) weighted sum with weights (n + 1 - r).
class DecompositionProfile {
public:
    static DecompositionProfile compute(const ReturnTables& tables, int n_max, unsigned workers = 1);

    int n_max() const noexcept { return n_max_; }
    VarianceDecomposition at(int n) const;

private:
    int n_max_ = 0;
    std::vector<double> a2_, a3_, b2_, b3_;
};

double a3_exact(const IncrementLaw& law, int n, const ExactOptions& opt = {});
double a2_exact(const IncrementLaw& law, int n, const ExactOptions& opt = {});
std::array<double, 2> b2_b3_exact(const IncrementLaw& law, int n, const ExactOptions& opt = {});
VarianceDecomposition variance_exact(const IncrementLaw& law, int n, const ExactOptions& opt = {});
std::vector<VarianceDecomposition> variance_profile(const IncrementLaw& law, int n_max, const ExactOptions& opt = {});

enum class IndexSet { A1 = 0, A2, A3, B1, B2, B3 };

/// Which of the six sets the pair of index pairs (i1 < j1), (i2 < j2) lies in.
IndexSet classify(int i1, int j1, int i2, int j2);

struct EnumerationResult {
    std::int64_t n = 0;
    double mean = 0.0;
    double second_moment = 0.0;
    /// sum over each set of P(S_i1 = S_j1, S_i2 = S_j2) - P(S_i1 = S_j1) P(S_i2 = S_j2)
    std::array<double, 6> set_sums{};

    double var() const noexcept { return second_moment - mean * mean; }
    double set_sum(IndexSet s) const noexcept { return set_sums[static_cast<std::size_t>(s)]; }
};

/// Brute force over all |support|^n weighted paths. Finite laws only,
/// n <= 10 and at most 2e7 paths.
EnumerationResult variance_enumeration(const IncrementLaw& law, int n);

}  // namespace silt
