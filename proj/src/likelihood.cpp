#include "mstate/likelihood.hpp"

#include <algorithm>
#include <cmath>

#include "mstate/errors.hpp"

namespace mstate {

ClusterConfiguration::ClusterConfiguration(std::vector<int> labels)
    : labels_(std::move(labels)) {
  const auto n = static_cast<long long>(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] < 1 || labels_[i] > n)
      throw Error("label " + std::to_string(labels_[i]) + " at position " +
                  std::to_string(i) + " outside [1, " + std::to_string(n) + "]");
}

ClusterConfiguration ClusterConfiguration::singletons(std::size_t n) {
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i + 1);
  return ClusterConfiguration(std::move(labels));
}

std::size_t ClusterConfiguration::cluster_count() const {
  std::vector<char> seen(labels_.size() + 1, 0);
  std::size_t k = 0;
  for (int l : labels_)
    if (!seen[l]) {
      seen[l] = 1;
      ++k;
    }
  return k;
}

bool ClusterConfiguration::is_canonical() const {
  int next = 1;
  for (int l : labels_) {
    if (l > next) return false;
    if (l == next) ++next;
  }
  return true;
}

void canonicalize_in_place(std::span<int> labels, std::span<int> scratch) {
  int next = 1;
  for (int& l : labels) {
    int& mapped = scratch[l];
    if (mapped == 0) mapped = next++;
    l = mapped;
  }
  std::fill(scratch.begin(), scratch.end(), 0);
}

ClusterConfiguration canonicalize(const ClusterConfiguration& s) {
  std::vector<int> labels = s.labels();
  std::vector<int> scratch(labels.size() + 1, 0);
  canonicalize_in_place(labels, scratch);
  return ClusterConfiguration(std::move(labels));
}

const ClusterStat* ClusterStats::find(int label) const {
  for (const auto& c : clusters)
    if (c.label == label) return &c;
  return nullptr;
}

namespace {

// Shared by cluster_stats and LikelihoodEvaluator so both produce the same
// bits for the same partition.
double internal_correlation(const CorrelationMatrix& c,
                            std::span<const std::size_t> members) {
  double off = 0.0;
  for (std::size_t a = 0; a < members.size(); ++a) {
    const auto row = c.row(members[a]);
    for (std::size_t b = a + 1; b < members.size(); ++b) off += row[members[b]];
  }
  return static_cast<double>(members.size()) + 2.0 * off;
}

}  // namespace

ClusterStats cluster_stats(const CorrelationMatrix& c, const ClusterConfiguration& s) {
  const std::size_t n = s.size();
  if (c.rows() != n || c.cols() != n)
    throw DimensionMismatchError("correlation is " + std::to_string(c.rows()) + "x" +
                                 std::to_string(c.cols()) + " but configuration has " +
                                 std::to_string(n) + " objects");

  // Group members by label in order of first occurrence.
  std::vector<int> slot(n + 1, -1);
  std::vector<std::vector<std::size_t>> groups;
  ClusterStats out;
  for (std::size_t i = 0; i < n; ++i) {
    const int l = s[i];
    if (slot[l] < 0) {
      slot[l] = static_cast<int>(groups.size());
      groups.emplace_back();
      out.clusters.push_back(ClusterStat{l, 0, 0.0, 0.0});
    }
    groups[slot[l]].push_back(i);
  }
  for (std::size_t k = 0; k < groups.size(); ++k) {
    auto& st = out.clusters[k];
    st.n = groups[k].size();
    st.c = internal_correlation(c, groups[k]);
    st.g = coupling(st.n, st.c);
  }
  return out;
}

double coupling(std::size_t n, double c) {
  if (n <= 1) return 0.0;
  const double nn = static_cast<double>(n);
  if (!(c > nn)) return 0.0;
  const double upper = nn * nn * (1.0 - kCorrelationClamp);
  c = std::min(c, upper);
  return std::sqrt((c - nn) / (nn * nn - nn));
}

double cluster_log_likelihood_term(std::size_t n, double c) {
  if (n <= 1) return 0.0;
  const double nn = static_cast<double>(n);
  if (!(c > nn)) return 0.0;
  const double n2 = nn * nn;
  const double clamped = std::min(c, n2 * (1.0 - kCorrelationClamp));
  return std::log(nn / c) + (nn - 1.0) * std::log((n2 - nn) / (n2 - clamped));
}

double log_likelihood(const ClusterStats& stats) {
  double sum = 0.0;
  for (const auto& s : stats.clusters) sum += cluster_log_likelihood_term(s.n, s.c);
  return 0.5 * sum;
}

double log_likelihood(const CorrelationMatrix& c, const ClusterConfiguration& s) {
  return log_likelihood(cluster_stats(c, s));
}

// --- LikelihoodEvaluator ---------------------------------------------------

LikelihoodEvaluator::LikelihoodEvaluator(const CorrelationMatrix& c)
    : corr_(&c),
      counts_(c.rows() + 2, 0),
      offsets_(c.rows() + 2, 0),
      members_(c.rows(), 0) {}

double LikelihoodEvaluator::operator()(std::span<const int> labels) {
  const std::size_t n = labels.size();
  int k = 0;
  for (int l : labels) {
    ++counts_[l];
    k = std::max(k, l);
  }
  offsets_[1] = 0;
  for (int l = 1; l <= k; ++l) offsets_[l + 1] = offsets_[l] + counts_[l];
  for (std::size_t i = 0; i < n; ++i) members_[offsets_[labels[i]]++] = i;
  // offsets_[l] now points one past the end of cluster l.

  double sum = 0.0;
  std::size_t begin = 0;
  for (int l = 1; l <= k; ++l) {
    const std::size_t end = offsets_[l];
    const std::size_t size = end - begin;
    if (size > 1) {
      const double cs = internal_correlation(
          *corr_, std::span<const std::size_t>(members_.data() + begin, size));
      sum += cluster_log_likelihood_term(size, cs);
    }
    begin = end;
    counts_[l] = 0;
  }
  return 0.5 * sum;
}

// --- IncrementalClusterStats -----------------------------------------------

IncrementalClusterStats::IncrementalClusterStats(const CorrelationMatrix& c,
                                                 const ClusterConfiguration& s)
    : corr_(&c), labels_(s.labels()), n_(s.size() + 1, 0), c_(s.size() + 1, 0.0) {
  if (c.rows() != s.size() || c.cols() != s.size())
    throw DimensionMismatchError("correlation and configuration sizes differ");
  for (const auto& st : cluster_stats(c, s).clusters) {
    n_[st.label] = st.n;
    c_[st.label] = st.c;
  }
}

double IncrementalClusterStats::correlation_with(std::size_t i, int label) const {
  double s = 0.0;
  const auto row = corr_->row(i);
  for (std::size_t j = 0; j < labels_.size(); ++j)
    if (j != i && labels_[j] == label) s += row[j];
  return s;
}

void IncrementalClusterStats::move(std::size_t i, int label) {
  if (label < 1 || static_cast<std::size_t>(label) > labels_.size())
    throw Error("label out of range");
  const int old = labels_[i];
  if (old == label) return;
  c_[old] -= 1.0 + 2.0 * correlation_with(i, old);
  if (--n_[old] == 0) c_[old] = 0.0;
  c_[label] += 1.0 + 2.0 * correlation_with(i, label);
  ++n_[label];
  labels_[i] = label;
}

double IncrementalClusterStats::log_likelihood() const {
  double sum = 0.0;
  for (std::size_t l = 1; l < n_.size(); ++l)
    sum += cluster_log_likelihood_term(n_[l], c_[l]);
  return 0.5 * sum;
}

}  // namespace mstate
