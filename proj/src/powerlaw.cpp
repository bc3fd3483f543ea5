#include "mstate/powerlaw.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "mstate/errors.hpp"
#include "mstate/parallel.hpp"

namespace mstate {

namespace {

// B_{2j} / (2j)! for j = 1..9.
constexpr std::array<double, 9> kBernoulliOverFactorial = {
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
};

constexpr double kShift = 15.0;

// ln k for small integers, so the direct part of the zeta sum costs one exp per
// term when q is an integer.
struct LogTable {
  static constexpr int kSize = 64;
  std::array<double, kSize> v{};
  LogTable() {
    for (int k = 1; k < kSize; ++k) v[k] = std::log(static_cast<double>(k));
  }
};

const LogTable& log_table() {
  static const LogTable table;
  return table;
}

double int_pow_neg(double s, std::int64_t x) {
  const auto& t = log_table();
  if (x < LogTable::kSize) return std::exp(-s * t.v[x]);
  return std::exp(-s * std::log(static_cast<double>(x)));
}

struct Tail {
  std::vector<std::int64_t> values;  // distinct values, ascending
  std::vector<std::size_t> counts;   // occurrences of each
  std::vector<double> log_sum;       // log_sum[k] = sum of ln x over values[k..]
  std::vector<std::size_t> n_from;   // n_from[k] = number of points >= values[k]
};

Tail summarize(std::span<const std::int64_t> sizes) {
  std::vector<std::int64_t> sorted(sizes.begin(), sizes.end());
  std::sort(sorted.begin(), sorted.end());
  Tail t;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    t.values.push_back(sorted[i]);
    t.counts.push_back(j - i);
    i = j;
  }
  const std::size_t m = t.values.size();
  t.log_sum.assign(m + 1, 0.0);
  t.n_from.assign(m + 1, 0);
  for (std::size_t k = m; k-- > 0;) {
    t.log_sum[k] = t.log_sum[k + 1] +
                   static_cast<double>(t.counts[k]) * std::log(static_cast<double>(t.values[k]));
    t.n_from[k] = t.n_from[k + 1] + t.counts[k];
  }
  return t;
}

AlphaFit maximize_alpha(double n, double log_sum, std::int64_t xmin) {
  const double q = static_cast<double>(xmin);
  auto loglik = [&](double a) { return -n * std::log(hurwitz_zeta(a, q)) - a * log_sum; };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = kAlphaLower, hi = kAlphaUpper;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = loglik(x1), f2 = loglik(x2);
  while (hi - lo > kAlphaTolerance) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = loglik(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = loglik(x1);
    }
  }
  AlphaFit fit;
  fit.alpha = 0.5 * (lo + hi);
  fit.log_likelihood = loglik(fit.alpha);
  fit.at_upper_bound = kAlphaUpper - fit.alpha < 10.0 * kAlphaTolerance;
  return fit;
}

// KS over the tail values[k..] of a summary.
double ks_from(const Tail& t, std::size_t k, double alpha) {
  const std::int64_t xmin = t.values[k];
  const double z0 = hurwitz_zeta(alpha, static_cast<double>(xmin));
  const double n = static_cast<double>(t.n_from[k]);

  double d = 0.0;
  double z = z0;  // zeta(alpha, values[j]): model mass at or above values[j]
  double below = 0.0;  // empirical CDF just below values[j]
  for (std::size_t j = k; j < t.values.size(); ++j) {
    const std::int64_t v = t.values[j];
    if (j > k) {
      // Move z from values[j-1] to v.
      const std::int64_t prev = t.values[j - 1];
      if (v - prev <= 16) {
        for (std::int64_t x = prev; x < v; ++x) z -= int_pow_neg(alpha, x);
      } else {
        z = hurwitz_zeta(alpha, static_cast<double>(v));
      }
    }
    const double model_before = 1.0 - z / z0;  // P(X <= v - 1)
    const double model_at = 1.0 - (z - int_pow_neg(alpha, v)) / z0;  // P(X <= v)
    const double emp_at = below + static_cast<double>(t.counts[j]) / n;
    d = std::max({d, std::abs(below - model_before), std::abs(emp_at - model_at)});
    below = emp_at;
  }
  return std::min(d, 1.0);
}

}  // namespace

double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0)) throw Error("hurwitz_zeta requires s > 1");
  if (!(q > 0.0)) throw Error("hurwitz_zeta requires q > 0");

  double sum = 0.0;
  double a = q;
  const bool integral = q == std::floor(q) && q < 1e15;
  while (a < kShift) {
    sum += integral ? int_pow_neg(s, static_cast<std::int64_t>(a)) : std::pow(a, -s);
    a += 1.0;
  }
  // Euler-Maclaurin tail from a.
  const double a_s = std::pow(a, -s);
  sum += a * a_s / (s - 1.0) + 0.5 * a_s;
  const double inv_a2 = 1.0 / (a * a);
  double rising = s;           // s (s+1) ... (s + 2j - 2)
  double power = a_s / a;      // a^{-s-2j+1}
  for (std::size_t j = 0; j < kBernoulliOverFactorial.size(); ++j) {
    const double term = kBernoulliOverFactorial[j] * rising * power;
    sum += term;
    if (std::abs(term) < 1e-17 * sum) break;
    const double k = 2.0 * static_cast<double>(j + 1);
    rising *= (s + k - 1.0) * (s + k);
    power *= inv_a2;
  }
  return sum;
}

// --- DiscretePowerLaw ------------------------------------------------------

DiscretePowerLaw::DiscretePowerLaw(double alpha, std::int64_t xmin)
    : alpha_(alpha), xmin_(xmin) {
  if (!(alpha > 1.0)) throw Error("power-law alpha must exceed 1");
  if (xmin < 1) throw Error("power-law x_min must be at least 1");
  norm_ = hurwitz_zeta(alpha, static_cast<double>(xmin));
}

double DiscretePowerLaw::pmf(std::int64_t x) const {
  if (x < xmin_) return 0.0;
  return int_pow_neg(alpha_, x) / norm_;
}

double DiscretePowerLaw::cdf(std::int64_t x) const {
  if (x < xmin_) return 0.0;
  return 1.0 - hurwitz_zeta(alpha_, static_cast<double>(x) + 1.0) / norm_;
}

// --- DiscretePowerLawSampler ------------------------------------------------

DiscretePowerLawSampler::DiscretePowerLawSampler(const DiscretePowerLaw& law) : law_(law) {
  constexpr std::size_t kMaxTable = std::size_t{1} << 16;
  constexpr double kTableMass = 1.0 - 1e-6;
  cumulative_.reserve(1024);
  double c = 0.0;
  for (std::int64_t x = law.xmin(); cumulative_.size() < kMaxTable; ++x) {
    c += law.pmf(x);
    cumulative_.push_back(c);
    if (c >= kTableMass) break;
  }
}

std::int64_t DiscretePowerLawSampler::search_tail(double u) const {
  // Smallest x with P(X <= x) >= u, i.e. zeta(alpha, x + 1) <= (1 - u) Z.
  const double target = (1.0 - u) * law_.normalizer();
  const double s = law_.alpha();
  auto ok = [&](std::int64_t x) { return hurwitz_zeta(s, static_cast<double>(x) + 1.0) <= target; };
  std::int64_t lo = law_.xmin() + static_cast<std::int64_t>(cumulative_.size()) - 1;  // not ok
  std::int64_t hi = std::max<std::int64_t>(lo + 1, 2 * lo);
  while (!ok(hi)) {
    lo = hi;
    if (hi >= kSampleCap / 2) return kSampleCap;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

std::int64_t DiscretePowerLawSampler::operator()(RandomStream& rng) const {
  const double u = rng.uniform();
  if (u < cumulative_.back()) {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return law_.xmin() + (it - cumulative_.begin());
  }
  return search_tail(u);
}

// --- fitting ----------------------------------------------------------------

AlphaFit fit_alpha(std::span<const std::int64_t> sizes, std::int64_t xmin) {
  if (xmin < 1) throw Error("x_min must be at least 1");
  double n = 0.0, log_sum = 0.0;
  for (std::int64_t x : sizes) {
    if (x < 1) throw Error("sizes must be positive integers");
    if (x >= xmin) {
      n += 1.0;
      log_sum += std::log(static_cast<double>(x));
    }
  }
  if (n < 2.0)
    throw InsufficientTailError("fewer than 2 values at or above x_min = " + std::to_string(xmin));
  return maximize_alpha(n, log_sum, xmin);
}

double ks_distance(std::span<const std::int64_t> sizes, double alpha, std::int64_t xmin) {
  std::vector<std::int64_t> tail;
  for (std::int64_t x : sizes)
    if (x >= xmin) tail.push_back(x);
  if (tail.empty()) throw InsufficientTailError("no values at or above x_min");
  const Tail t = summarize(tail);
  if (t.values.front() != xmin) {
    // Tail starts above x_min: prepend a zero-count entry so the model mass
    // between x_min and the first value is included.
    Tail padded;
    padded.values.push_back(xmin);
    padded.counts.push_back(0);
    padded.values.insert(padded.values.end(), t.values.begin(), t.values.end());
    padded.counts.insert(padded.counts.end(), t.counts.begin(), t.counts.end());
    padded.n_from.assign(padded.values.size() + 1, 0);
    for (std::size_t k = padded.values.size(); k-- > 0;)
      padded.n_from[k] = padded.n_from[k + 1] + padded.counts[k];
    return ks_from(padded, 0, alpha);
  }
  return ks_from(t, 0, alpha);
}

PowerLawFit select_xmin(std::span<const std::int64_t> sizes) {
  for (std::int64_t x : sizes)
    if (x < 1) throw Error("sizes must be positive integers");
  const Tail t = summarize(sizes);
  if (t.values.size() < 2) throw DegenerateDataError("all values are identical");

  PowerLawFit best;
  bool have = false;
  for (std::size_t k = 0; k < t.values.size(); ++k) {
    if (t.n_from[k] < 2) break;
    const AlphaFit af =
        maximize_alpha(static_cast<double>(t.n_from[k]), t.log_sum[k], t.values[k]);
    const double d = ks_from(t, k, af.alpha);
    if (!have || d < best.ks) {
      have = true;
      best.alpha = af.alpha;
      best.xmin = t.values[k];
      best.ks = d;
      best.log_likelihood = af.log_likelihood;
      best.n_tail = t.n_from[k];
      best.at_upper_bound = af.at_upper_bound;
    }
  }
  return best;
}

double p_value(std::span<const std::int64_t> sizes, const PowerLawFit& fit,
               std::size_t n_bootstrap, std::uint64_t seed, unsigned threads) {
  if (n_bootstrap < 100) throw Error("n_bootstrap must be at least 100");
  const std::size_t n = sizes.size();
  std::vector<std::int64_t> body;
  for (std::int64_t x : sizes)
    if (x < fit.xmin) body.push_back(x);
  std::sort(body.begin(), body.end());
  const double tail_prob = static_cast<double>(n - body.size()) / static_cast<double>(n);

  const DiscretePowerLawSampler sampler(DiscretePowerLaw(fit.alpha, fit.xmin));
  std::vector<char> exceeds(n_bootstrap, 0);
  parallel_chunks(n_bootstrap, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::int64_t> sample(n);
    for (std::size_t r = begin; r < end; ++r) {
      auto rng = RandomStream::keyed(seed, {r});
      for (auto& x : sample) {
        if (body.empty() || rng.uniform() < tail_prob)
          x = sampler(rng);
        else
          x = body[rng.below(body.size())];
      }
      double ks = 0.0;
      try {
        ks = select_xmin(sample).ks;
      } catch (const DegenerateDataError&) {
        ks = 0.0;
      }
      exceeds[r] = ks >= fit.ks ? 1 : 0;
    }
  });
  const auto hits = std::count(exceeds.begin(), exceeds.end(), 1);
  return static_cast<double>(hits) / static_cast<double>(n_bootstrap);
}

double continuous_alpha_estimate(std::span<const std::int64_t> sizes, std::int64_t xmin) {
  double n = 0.0, s = 0.0;
  const double shift = static_cast<double>(xmin) - 0.5;
  for (std::int64_t x : sizes)
    if (x >= xmin) {
      n += 1.0;
      s += std::log(static_cast<double>(x) / shift);
    }
  if (n < 2.0) throw InsufficientTailError("fewer than 2 values at or above x_min");
  return 1.0 + n / s;
}

std::vector<int> significant_states(const ClusterStats& stats, std::int64_t xmin) {
  std::vector<const ClusterStat*> keep;
  for (const auto& c : stats.clusters)
    if (static_cast<std::int64_t>(c.n) >= xmin) keep.push_back(&c);
  std::sort(keep.begin(), keep.end(), [](const ClusterStat* a, const ClusterStat* b) {
    if (a->n != b->n) return a->n > b->n;
    if (a->c != b->c) return a->c > b->c;
    return a->label < b->label;
  });
  std::vector<int> out;
  out.reserve(keep.size());
  for (const auto* c : keep) out.push_back(c->label);
  return out;
}

nlohmann::json to_json(const PowerLawFit& fit) {
  nlohmann::json j;
  j["alpha"] = fit.alpha;
  j["xmin"] = fit.xmin;
  j["ks"] = fit.ks;
  j["p_value"] = fit.p_value ? nlohmann::json(*fit.p_value) : nlohmann::json(nullptr);
  j["loglik"] = fit.log_likelihood;
  j["n_tail"] = fit.n_tail;
  j["at_upper_bound"] = fit.at_upper_bound;
  return j;
}

PowerLawFit power_law_fit_from_json(const nlohmann::json& j) {
  try {
    PowerLawFit f;
    f.alpha = j.at("alpha").get<double>();
    f.xmin = j.at("xmin").get<std::int64_t>();
    f.ks = j.at("ks").get<double>();
    if (j.contains("p_value") && !j.at("p_value").is_null()) f.p_value = j.at("p_value").get<double>();
    f.log_likelihood = j.at("loglik").get<double>();
    f.n_tail = j.at("n_tail").get<std::size_t>();
    f.at_upper_bound = j.value("at_upper_bound", false);
    if (f.xmin < 1) throw FormatError("xmin must be at least 1");
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("power-law fit: ") + e.what());
  }
}

}  // namespace mstate
