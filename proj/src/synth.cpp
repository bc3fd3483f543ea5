#include "mstate/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "mstate/errors.hpp"
#include "mstate/rng.hpp"

namespace mstate {

namespace {

constexpr std::uint64_t kEtaDomain = 1;
constexpr std::uint64_t kEpsDomain = 2;

void fill_normals(RandomStream rng, std::span<double> out) {
  for (double& v : out) v = standard_normal(rng);
}

}  // namespace

std::size_t PlantedSpec::object_count() const {
  std::size_t n = 0;
  for (auto s : cluster_sizes) n += s;
  return n;
}

void PlantedSpec::validate() const {
  if (cluster_sizes.empty()) throw Error("planted partition needs at least one cluster");
  if (couplings.size() != cluster_sizes.size())
    throw Error("one coupling per cluster required");
  for (auto s : cluster_sizes)
    if (s == 0) throw Error("cluster sizes must be positive");
  for (double g : couplings)
    if (!(g >= 0.0 && g < 1.0)) throw Error("couplings must lie in [0, 1)");
  if (measurements < 2) throw Error("need at least 2 measurements");
}

PlantedData generate(const PlantedSpec& spec) {
  spec.validate();
  const std::size_t n = spec.object_count();
  const std::size_t d = spec.measurements;

  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t s = 0; s < spec.cluster_sizes.size(); ++s)
    labels.insert(labels.end(), spec.cluster_sizes[s], static_cast<int>(s + 1));

  Matrix eta(spec.cluster_sizes.size(), d);
  for (std::size_t s = 0; s < eta.rows(); ++s)
    fill_normals(RandomStream::keyed(spec.seed, {kEtaDomain, s}), eta.row(s));

  PlantedData out;
  out.returns.values = Matrix(d, n);
  std::vector<double> eps(d);
  for (std::size_t i = 0; i < n; ++i) {
    fill_normals(RandomStream::keyed(spec.seed, {kEpsDomain, i}), eps);
    const auto s = static_cast<std::size_t>(labels[i] - 1);
    const double g = spec.couplings[s];
    const double h = std::sqrt(1.0 - g * g);
    for (std::size_t t = 0; t < d; ++t)
      out.returns.values(t, i) = g * eta(s, t) + h * eps[t];
  }
  for (std::size_t t = 0; t < d; ++t)
    out.returns.rows.push_back(SeriesLabel{"SYN" + std::to_string(t), Feature::Price});
  for (std::size_t i = 0; i < n; ++i)
    out.returns.periods.push_back(Timestamp{} + std::chrono::minutes(static_cast<long>(i)));
  out.truth = ClusterConfiguration(std::move(labels));
  return out;
}

double adjusted_rand_index(const ClusterConfiguration& a, const ClusterConfiguration& b) {
  if (a.size() != b.size()) throw DimensionMismatchError("partitions differ in size");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1;
    rows[a[i]] += 1;
    cols[b[i]] += 1;
  }
  auto pairs = [](double x) { return x * (x - 1) / 2; };
  double index = 0, sum_a = 0, sum_b = 0;
  for (const auto& [k, v] : table) index += pairs(v);
  for (const auto& [k, v] : rows) sum_a += pairs(v);
  for (const auto& [k, v] : cols) sum_b += pairs(v);
  const double total = pairs(static_cast<double>(n));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both trivial partitions
  return (index - expected) / (max_index - expected);
}

SyntheticMarket generate_market(const SyntheticMarketSpec& spec) {
  const auto& cal = spec.calendar;
  cal.validate();
  if (spec.instruments == 0) throw Error("need at least one instrument");
  const std::size_t ppd = cal.periods_per_day();
  if (spec.states == 0 || spec.states > ppd)
    throw Error("states must lie in [1, periods per day]");
  const std::size_t bars = cal.period_count();
  if (bars < 5) throw Error("calendar too short for a synthetic market");
  const std::size_t n = bars - 1;  // return periods
  const std::size_t d = spec.instruments * 4;

  // Period t (return of bar t+1) takes the state of bar t+1's time-of-day block.
  std::vector<int> labels(n);
  for (std::size_t t = 0; t < n; ++t)
    labels[t] = 1 + static_cast<int>(((t + 1) % ppd) * spec.states / ppd);

  Matrix eta(spec.states, d);
  for (std::size_t s = 0; s < spec.states; ++s)
    fill_normals(RandomStream::keyed(spec.seed, {kEtaDomain, s}), eta.row(s));

  const double g = spec.coupling;
  if (!(g >= 0.0 && g < 1.0)) throw Error("coupling must lie in [0, 1)");
  const double h = std::sqrt(1.0 - g * g);
  // Levels for [instrument][feature]; feature order matches Feature.
  constexpr double kScale = 0.01;
  std::vector<std::array<double, 4>> level(spec.instruments);
  for (std::size_t m = 0; m < spec.instruments; ++m)
    level[m] = {50.0 + 10.0 * static_cast<double>(m), 10000.0, 0.05, 1.0};

  SyntheticMarket out;
  std::vector<double> eps(d);
  auto emit_period = [&](std::size_t p) {
    const Timestamp start = cal.period_start(p);
    for (std::size_t m = 0; m < spec.instruments; ++m) {
      const auto& lv = level[m];
      const std::string name = "SYN" + std::to_string(m);
      const double bid = lv[0] - lv[2] / 2, ask = lv[0] + lv[2] / 2;
      // The imbalance slot walks the ask/bid depth ratio, which keeps
      // bid / (bid + ask) inside (0, 1) however far the walk drifts.
      const double bid_size = 1000.0 / (1.0 + lv[3]), ask_size = 1000.0 - bid_size;
      auto quote = [&](int sec) {
        TickRecord q;
        q.timestamp = start + std::chrono::seconds(sec);
        q.instrument = name;
        q.kind = TickKind::Quote;
        q.bid = bid;
        q.ask = ask;
        q.bid_size = bid_size;
        q.ask_size = ask_size;
        out.ticks.push_back(q);
      };
      auto trade = [&](int sec, double price, double volume) {
        TickRecord tr;
        tr.timestamp = start + std::chrono::seconds(sec);
        tr.instrument = name;
        tr.kind = TickKind::Trade;
        tr.price = price;
        tr.volume = volume;
        out.ticks.push_back(tr);
      };
      quote(10);
      trade(20, lv[0] * 0.999, lv[1] / 2);
      quote(30);
      trade(40, lv[0], lv[1] / 2);
    }
  };

  // Opening auction print on the first day; must be discarded by aggregation.
  {
    TickRecord auction;
    auction.timestamp = cal.period_start(0) - std::chrono::minutes(5);
    auction.instrument = "SYN0";
    auction.kind = TickKind::Trade;
    auction.price = level[0][0];
    auction.volume = 123456.0;
    out.ticks.push_back(auction);
  }

  emit_period(0);
  for (std::size_t t = 0; t < n; ++t) {
    fill_normals(RandomStream::keyed(spec.seed, {kEpsDomain, t}), eps);
    const auto s = static_cast<std::size_t>(labels[t] - 1);
    for (std::size_t m = 0; m < spec.instruments; ++m)
      for (std::size_t f = 0; f < 4; ++f) {
        const std::size_t row = m * 4 + f;
        const double x = g * eta(s, row) + h * eps[row];
        level[m][f] *= 1.0 + kScale * x;
      }
    emit_period(t + 1);
  }

  std::stable_sort(out.ticks.begin(), out.ticks.end(),
                   [](const TickRecord& a, const TickRecord& b) { return a.timestamp < b.timestamp; });
  out.truth = ClusterConfiguration(std::move(labels));
  return out;
}

}  // namespace mstate
