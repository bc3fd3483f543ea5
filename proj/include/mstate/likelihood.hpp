#pragma once

// Maximum-likelihood scoring of a partition of objects given their pairwise
// correlations, under the single-factor-per-cluster model
//
//   x_i = g_s * eta_s + sqrt(1 - g_s^2) * eps_i.
//
// For cluster s with n_s members and internal correlation
// c_s = sum_{i,j in s} C_ij the per-measurement log-likelihood is
//
//   L_c = 1/2 sum_{s: n_s > 1} [ log(n_s / c_s)
//                                + (n_s - 1) log((n_s^2 - n_s) / (n_s^2 - c_s)) ]
//
// and the fitted coupling is g_s = sqrt((c_s - n_s) / (n_s^2 - n_s)).
// Larger L_c means more structure; the all-singleton partition scores 0.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mstate/matrix.hpp"

namespace mstate {

using CorrelationMatrix = Matrix;

// Cluster labels, one per object, each in [1, N].
class ClusterConfiguration {
 public:
  ClusterConfiguration() = default;
  // Throws Error when any label lies outside [1, labels.size()].
  explicit ClusterConfiguration(std::vector<int> labels);

  static ClusterConfiguration singletons(std::size_t n);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int operator[](std::size_t i) const { return labels_[i]; }

  // Number of distinct labels.
  std::size_t cluster_count() const;
  bool is_canonical() const;

  friend bool operator==(const ClusterConfiguration&,
                         const ClusterConfiguration&) = default;

 private:
  std::vector<int> labels_;
};

// Relabels clusters 1, 2, ... in order of first occurrence. Idempotent.
ClusterConfiguration canonicalize(const ClusterConfiguration& s);
// In-place variant over a raw label buffer. Labels may be any positive ints;
// `scratch` must be zero-filled with size greater than the largest label and
// is left zeroed.
void canonicalize_in_place(std::span<int> labels, std::span<int> scratch);

struct ClusterStat {
  int label = 0;       // label as it appears in the input configuration
  std::size_t n = 0;   // member count
  double c = 0.0;      // internal correlation, diagonal included
  double g = 0.0;      // maximum-likelihood coupling
};

// One entry per cluster, in order of first occurrence.
struct ClusterStats {
  std::vector<ClusterStat> clusters;

  const ClusterStat* find(int label) const;
};

// c_s is accumulated as n_s + 2 * sum_{i<j in s} C_ij with members in index
// order, so it depends only on the partition, not on the label values.
ClusterStats cluster_stats(const CorrelationMatrix& c, const ClusterConfiguration& s);

// Relative clamp applied to c_s near the n_s^2 singularity.
inline constexpr double kCorrelationClamp = 1e-9;

double coupling(std::size_t n, double c);

// Contribution of one cluster to L_c (before the overall factor 1/2).
// Zero for n <= 1 or c <= n.
double cluster_log_likelihood_term(std::size_t n, double c);

double log_likelihood(const ClusterStats& stats);
double log_likelihood(const CorrelationMatrix& c, const ClusterConfiguration& s);

// Allocation-free scorer for a fixed correlation matrix. Intended for hot
// loops where many configurations are evaluated; one instance per thread.
class LikelihoodEvaluator {
 public:
  explicit LikelihoodEvaluator(const CorrelationMatrix& c);

  // `labels` must be canonical (labels form the prefix 1..K).
  double operator()(std::span<const int> canonical_labels);

 private:
  const CorrelationMatrix* corr_;
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> members_;
};

// Cluster statistics that support moving single objects between clusters
// with O(N) updates instead of the O(N^2) rebuild.
class IncrementalClusterStats {
 public:
  IncrementalClusterStats(const CorrelationMatrix& c, const ClusterConfiguration& s);

  // Moves object i to `label` (any value in [1, N]).
  void move(std::size_t i, int label);

  const std::vector<int>& labels() const { return labels_; }
  std::size_t count(int label) const { return n_[label]; }
  double internal_correlation(int label) const { return c_[label]; }
  double log_likelihood() const;

 private:
  double correlation_with(std::size_t i, int label) const;

  const CorrelationMatrix* corr_;
  std::vector<int> labels_;
  std::vector<std::size_t> n_;  // indexed by label
  std::vector<double> c_;
};

}  // namespace mstate
