#pragma once

// Discrete power-law fitting of the cluster-size distribution:
//   p(x) = x^{-alpha} / zeta(alpha, x_min),  x >= x_min,
// with x_min chosen by minimizing the Kolmogorov-Smirnov distance and a
// semiparametric bootstrap for the goodness-of-fit p-value.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "mstate/likelihood.hpp"
#include "mstate/rng.hpp"

namespace mstate {

// Hurwitz zeta sum_{k>=0} (q + k)^{-s} for s > 1, q > 0. Direct summation up
// to q + M >= 15, then an Euler-Maclaurin tail; relative error below 1e-13
// for s in (1, 6].
double hurwitz_zeta(double s, double q);

inline constexpr double kAlphaLower = 1.01;
inline constexpr double kAlphaUpper = 6.0;
inline constexpr double kAlphaTolerance = 1e-6;

// Discrete power law on {x_min, x_min + 1, ...}.
class DiscretePowerLaw {
 public:
  DiscretePowerLaw(double alpha, std::int64_t xmin);

  double alpha() const { return alpha_; }
  std::int64_t xmin() const { return xmin_; }
  double normalizer() const { return norm_; }  // zeta(alpha, xmin)

  double pmf(std::int64_t x) const;
  // P(X <= x); 0 below x_min.
  double cdf(std::int64_t x) const;

 private:
  double alpha_;
  std::int64_t xmin_;
  double norm_;
};

// Inverse-CDF sampler: a cumulative table over the bulk and a zeta-based
// search beyond it. Values are capped at kSampleCap.
class DiscretePowerLawSampler {
 public:
  static constexpr std::int64_t kSampleCap = std::int64_t{1} << 50;

  explicit DiscretePowerLawSampler(const DiscretePowerLaw& law);
  std::int64_t operator()(RandomStream& rng) const;

 private:
  std::int64_t search_tail(double u) const;

  DiscretePowerLaw law_;
  std::vector<double> cumulative_;  // cumulative_[k] = P(X <= xmin + k)
};

struct AlphaFit {
  double alpha = 0.0;
  double log_likelihood = 0.0;
  bool at_upper_bound = false;  // every tail point sits at x_min (or nearly)
};

// Golden-section maximization of
//   L(alpha) = -n ln zeta(alpha, x_min) - alpha sum ln x_i
// over the tail x_i >= x_min, on [kAlphaLower, kAlphaUpper]. Throws
// InsufficientTailError for fewer than 2 tail points.
AlphaFit fit_alpha(std::span<const std::int64_t> sizes, std::int64_t xmin);

// Sup-norm distance between the empirical CDF of the tail (x >= x_min) and
// the fitted discrete CDF, taken over every integer >= x_min.
double ks_distance(std::span<const std::int64_t> sizes, double alpha, std::int64_t xmin);

struct PowerLawFit {
  double alpha = 0.0;
  std::int64_t xmin = 1;
  double ks = 0.0;
  std::optional<double> p_value;
  double log_likelihood = 0.0;
  std::size_t n_tail = 0;
  bool at_upper_bound = false;
};

// Tries every distinct value as x_min (keeping at least 2 tail points) and
// keeps the smallest KS distance, smaller x_min on ties. Throws
// DegenerateDataError when all values are equal. p_value is left empty.
PowerLawFit select_xmin(std::span<const std::int64_t> sizes);

// Semiparametric bootstrap: each replicate draws n points, each from the
// fitted tail with probability n_tail / n and otherwise uniformly from the
// observed values below x_min, refits with select_xmin and records its KS.
// Returns the fraction of replicates whose KS is >= the observed KS.
// Replicate r draws from the stream keyed (seed, r), so the value does not
// depend on `threads`. Replicates too degenerate to refit count as KS = 0.
double p_value(std::span<const std::int64_t> sizes, const PowerLawFit& fit,
               std::size_t n_bootstrap, std::uint64_t seed, unsigned threads = 1);

inline constexpr double kPlausibleThreshold = 0.1;

// Continuous approximation 1 + n / sum ln(x_i / (x_min - 1/2)); cross-check
// only.
double continuous_alpha_estimate(std::span<const std::int64_t> sizes, std::int64_t xmin);

// Labels of clusters with n_s >= x_min, largest first (ties: larger c_s,
// then smaller label).
std::vector<int> significant_states(const ClusterStats& stats, std::int64_t xmin);

nlohmann::json to_json(const PowerLawFit& fit);
PowerLawFit power_law_fit_from_json(const nlohmann::json& j);

}  // namespace mstate
