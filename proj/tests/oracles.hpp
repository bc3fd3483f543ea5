#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library routine it is checking: each oracle works from a separate
// derivation or a separate implementation.

#include <gsl/gsl_sf_zeta.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "mstate/matrix.hpp"

namespace oracle {

struct Group {
  double n = 0.0;
  double c = 0.0;
};

// n_s and c_s by a full double loop over (i, j), diagonal included.
inline std::map<int, Group> groups(const mstate::Matrix& c, const std::vector<int>& labels) {
  std::map<int, Group> g;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    g[labels[i]].n += 1.0;
    for (std::size_t j = 0; j < labels.size(); ++j)
      if (labels[i] == labels[j]) g[labels[i]].c += c(i, j);
  }
  return g;
}

// -H_c with H_c = 1/2 sum_s [ln(c/n) + (n-1) ln((n^2 - c)/(n^2 - n))], the
// Hamiltonian form of the same likelihood, written from the Gaussian
// integral route rather than the maximized-coupling form. Singletons are
// skipped since their term is 0/0 in the second log.
inline double minus_hamiltonian(const mstate::Matrix& c, const std::vector<int>& labels) {
  double h = 0.0;
  for (const auto& [label, g] : groups(c, labels)) {
    if (g.n < 2.0) continue;
    h += std::log(g.c / g.n) + (g.n - 1.0) * std::log((g.n * g.n - g.c) / (g.n * g.n - g.n));
  }
  return -0.5 * h;
}

// Coupling from c = g^2 n^2 + (1 - g^2) n by bisection on g in [0, 1).
inline double coupling_by_bisection(double n, double c) {
  if (n < 2.0 || c <= n) return 0.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g2 = mid * mid;
    const double model = g2 * n * n + (1.0 - g2) * n;
    (model < c ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Per-measurement log-likelihood of the one-factor Gaussian model at the
// bisection coupling, from the determinant and inverse of the block
// covariance (1 - g^2) I + g^2 11^T:
//   -1/2 sum_s [ ln(n g^2 + 1 - g^2) + (n - 1) ln(1 - g^2) ]
//   -1/2 sum_s [ n - g^2 c / (1 - g^2 + n g^2) ] / (1 - g^2)
// At the maximizing coupling this is L_c - N/2.
inline double gaussian_route(const mstate::Matrix& c, const std::vector<int>& labels) {
  double total = 0.0;
  for (const auto& [label, g] : groups(c, labels)) {
    const double gs = coupling_by_bisection(g.n, g.c);
    const double g2 = gs * gs;
    const double logdet = std::log(g.n * g2 + 1.0 - g2) + (g.n - 1.0) * std::log(1.0 - g2);
    const double trace = (g.n - g2 * g.c / (1.0 - g2 + g.n * g2)) / (1.0 - g2);
    total += -0.5 * (logdet + trace);
  }
  return total;
}

// Best L_c over all set partitions by plain recursion (assign each object
// to an existing block or a new one). `score` evaluates a label vector.
inline double best_over_partitions(std::size_t n,
                                   const std::function<double(const std::vector<int>&)>& score,
                                   std::uint64_t* visited = nullptr) {
  std::vector<int> labels(n, 0);
  double best = -1e300;
  std::uint64_t count = 0;
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int blocks) {
    if (i == n) {
      ++count;
      best = std::max(best, score(labels));
      return;
    }
    for (int b = 1; b <= blocks + 1; ++b) {
      labels[i] = b;
      rec(i + 1, std::max(blocks, b));
    }
  };
  rec(0, 0);
  if (visited) *visited = count;
  return best;
}

inline std::uint64_t bell_number(std::size_t n) {
  // Bell triangle.
  std::vector<std::uint64_t> row{1};
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (auto v : row) next.push_back(next.back() + v);
    row = next;
  }
  return row.front();
}

// KS distance by walking every integer from x_min to max(data), with the
// model CDF accumulated from GSL's Hurwitz zeta normalizer.
inline double ks_brute(const std::vector<std::int64_t>& data, double alpha, std::int64_t xmin) {
  std::vector<std::int64_t> tail;
  for (auto x : data)
    if (x >= xmin) tail.push_back(x);
  std::sort(tail.begin(), tail.end());
  const double z = gsl_sf_hzeta(alpha, static_cast<double>(xmin));
  const double n = static_cast<double>(tail.size());
  double model = 0.0, d = 0.0;
  std::size_t idx = 0;
  for (std::int64_t x = xmin; x <= tail.back(); ++x) {
    model += std::pow(static_cast<double>(x), -alpha) / z;
    while (idx < tail.size() && tail[idx] <= x) ++idx;
    d = std::max(d, std::abs(static_cast<double>(idx) / n - model));
  }
  return d;
}

// Adjusted Rand index from the contingency table.
inline double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> nij;
  std::map<int, double> ai, bj;
  for (std::size_t k = 0; k < a.size(); ++k) {
    nij[{a[k], b[k]}] += 1;
    ai[a[k]] += 1;
    bj[b[k]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1) / 2; };
  double sij = 0, sa = 0, sb = 0;
  for (auto& [k, v] : nij) sij += c2(v);
  for (auto& [k, v] : ai) sa += c2(v);
  for (auto& [k, v] : bj) sb += c2(v);
  const double expected = sa * sb / c2(static_cast<double>(a.size()));
  const double maxi = 0.5 * (sa + sb);
  if (maxi == expected) return 1.0;
  return (sij - expected) / (maxi - expected);
}

}  // namespace oracle
