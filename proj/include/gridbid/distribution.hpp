#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gridbid/core.hpp"
#include "gridbid/rng.hpp"

namespace gridbid {

enum class DistKind { PointMass, Gaussian, BoundedUniform, TwoPoint, Empirical };

std::string to_string(DistKind kind);

struct Atom {
    double value = 0.0;
    double weight = 0.0;
};

// Probability mass and first moment of a distribution restricted to an interval.
struct SegmentMoments {
    double mass = 0.0;    // P(lo <= X <= hi)
    double first = 0.0;   // E[X ; lo <= X <= hi]
};

// One-period price forecast model: the <mu_t, sigma_t> carrier.
//
// Five families are supported. A distribution may additionally carry price
// bounds, in which case its density is truncated to [floor, cap] and
// renormalized; mean() then reports the post-truncation mean, which is allowed
// to drift from the nominal parameter (declared_mean()).
class PriceDistribution {
  public:
    PriceDistribution() = default;

    static PriceDistribution point_mass(double mu);
    static PriceDistribution gaussian(double mu, double sigma);
    // Uniform on [mu - sqrt(3) sigma, mu + sqrt(3) sigma].
    static PriceDistribution bounded_uniform(double mu, double sigma);
    // Spike model: value pi with probability alpha, gamma with probability 1 - alpha.
    static PriceDistribution two_point(double pi, double gamma, double alpha);
    static PriceDistribution empirical(std::vector<double> samples);

    DistKind kind() const { return kind_; }
    bool truncated() const { return bounds_.has_value(); }
    const std::optional<PriceBounds>& bounds() const { return bounds_; }

    // Analytic mean of the realized (post-truncation) distribution.
    double mean() const;
    double stddev() const;
    // Nominal location parameter before any truncation.
    double declared_mean() const { return mu_; }
    double declared_sigma() const { return sigma_; }
    double two_point_pi() const { return pi_; }
    double two_point_gamma() const { return gamma_; }
    double two_point_alpha() const { return alpha_; }
    std::span<const double> samples() const { return samples_; }

    // Truncate-and-renormalize to the given bounds. Throws InfeasibleError when
    // no probability mass lies inside them.
    PriceDistribution truncate_normalize(PriceBounds bounds) const;

    bool is_discrete() const;
    // Realization atoms for discrete kinds, weights summing to 1.
    std::vector<Atom> atoms() const;

    // Closed-form restriction moments; lo/hi may be +-infinity. Exact for the
    // continuous kinds (via the normal CDF), a finite sum for discrete kinds.
    SegmentMoments segment_moments(double lo, double hi) const;

    // Support of the realized distribution (+-infinity for an untruncated Gaussian).
    double support_lo() const;
    double support_hi() const;

    double sample(Rng& rng) const;
    std::vector<double> sample_n(std::uint64_t seed, std::size_t n) const;

  private:
    void check_valid() const;

    DistKind kind_ = DistKind::PointMass;
    double mu_ = 0.0;     // nominal mean
    double sigma_ = 0.0;  // nominal deviation (0 for PointMass)
    double pi_ = 0.0;     // TwoPoint high price
    double gamma_ = 0.0;  // TwoPoint low price
    double alpha_ = 0.0;  // TwoPoint high-price probability
    std::vector<double> samples_;  // Empirical only, kept sorted
    std::optional<PriceBounds> bounds_;
};

// Spec-facing operation aliases.
double mean_of(const PriceDistribution& dist);
PriceDistribution truncate_normalize(const PriceDistribution& dist, PriceBounds bounds);
std::vector<double> sample(const PriceDistribution& dist, std::uint64_t seed, std::size_t n);

// Standard normal CDF / PDF helpers shared with the value engine.
double normal_cdf(double z);
double normal_pdf(double z);

}  // namespace gridbid
