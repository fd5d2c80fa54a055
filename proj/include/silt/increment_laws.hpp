#pragma once

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "silt/lattice.hpp"
#include "silt/rng.hpp"

namespace silt {

enum class LawKind { zipf1d, lazy_srw_2d, finite_custom };

std::string_view to_string(LawKind kind);

struct PmfEntry {
    Site site;
    double p = 0.0;
};

/// Symmetric 2x2 covariance matrix.
struct Covariance {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double determinant() const noexcept { return xx * yy - xy * xy; }
};

/// Which structural checks finite_custom applies. The lattice checks reject
/// laws whose support sits in a coset of a proper subgroup and, in d = 2,
/// laws with rank-deficient covariance. Diagnostic laws (point masses, the
/// periodic +-1 walk) need them switched off.
enum class LawChecks { strict, allow_lattice_periodic };

/// Step distribution of a random walk on Z^d, d in {1, 2}. Immutable after
/// construction; sampling takes the caller's engine.
class IncrementLaw {
public:
    /// P(X = k) = 3 / (pi^2 k^2) for k != 0. Characteristic function
    /// 1 - (3/pi)|t| + (3 / 2pi^2) t^2 on [-pi, pi), so gamma = 3/pi.
    static IncrementLaw zipf1d();

    /// P(0) = 1/2 and 1/8 on each of the four nearest neighbours.
    static IncrementLaw lazy_srw_2d();

    static IncrementLaw finite_custom(int dimension, std::vector<PmfEntry> pmf,
                                      LawChecks checks = LawChecks::strict);

    /// zipf1d conditioned on |X| <= max_step (renormalised), a finite law.
    static IncrementLaw truncated_zipf1d(int max_step);

    /// Builds a law from its JSON descriptor {kind, parameters}.
    static IncrementLaw from_json(const nlohmann::json& descriptor);

    /// Parses a CLI law spec: zipf1d, lazy2d, zipf1d-trunc:K or custom:<file>.
    static IncrementLaw parse(std::string_view spec);

    nlohmann::json to_json() const;

    LawKind kind() const noexcept { return kind_; }
    int dimension() const noexcept { return dimension_; }
    const std::string& name() const noexcept { return name_; }
    std::optional<double> gamma() const noexcept { return gamma_; }
    std::optional<Covariance> covariance() const noexcept { return covariance_; }

    bool has_finite_support() const noexcept { return kind_ != LawKind::zipf1d; }
    /// Support with probabilities; empty for zipf1d.
    std::span<const PmfEntry> support() const noexcept { return table_; }
    /// Largest |coordinate| in the support; throws for zipf1d.
    std::int64_t max_step() const;

    double pmf(Site x) const;
    bool is_symmetric() const;

    Site sample(Engine& rng) const;

    /// f(t) = E exp(i <t, X>) for t in J = [-pi, pi)^d. For d = 1, t2 must be 0.
    std::complex<double> charfn(double t1, double t2 = 0.0) const;

private:
    IncrementLaw() = default;
    void build_sampler();

    LawKind kind_ = LawKind::finite_custom;
    int dimension_ = 1;
    std::string name_;
    std::optional<double> gamma_;
    std::optional<Covariance> covariance_;
    std::vector<PmfEntry> table_;
    std::vector<double> cumulative_;  // finite laws: inverse-CDF table
    std::int64_t truncation_ = 0;      // zipf1d-trunc:K only, for the descriptor
};

/// P(|X| >= k) for zipf1d, k >= 1: (6/pi^2) * trigamma(k).
double zipf_tail(std::int64_t k);

/// Exact zipf1d magnitude from u in (0, 1]: the smallest k >= 1 with
/// P(|X| >= k + 1) < u. Uses a head table for k <= 1024 and a trigamma
/// bisection beyond.
std::int64_t zipf_magnitude(double u);

/// max |f(t)| over a grid of grid_size points per axis on J, excluding the
/// open ball of radius 2 pi / grid_size around 0.
double aperiodicity_witness(const IncrementLaw& law, int grid_size);

struct GammaEstimate {
    double estimate = 0.0;
    std::vector<double> ratios;  // (1 - Re f(t)) / |t| along the sequence
    bool converged = false;      // false when the ratios collapse to zero
};

/// Extrapolates (1 - Re f(t)) / |t| to t -> 0 along a decreasing sequence,
/// assuming a remainder linear in t. In d = 2 the first axis is used.
GammaEstimate gamma_from_charfn(const IncrementLaw& law, std::span<const double> t_sequence);

}  // namespace silt
