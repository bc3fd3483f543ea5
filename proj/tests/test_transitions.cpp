#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "mstate/errors.hpp"
#include "mstate/rng.hpp"
#include "mstate/transitions.hpp"

using namespace mstate;
using namespace std::chrono;

namespace {

const UtcOffset kUtc{0};

std::vector<TimedState> one_day(const std::vector<int>& states, int day = 1) {
  std::vector<TimedState> seq;
  const auto start = parse_iso8601("2012-11-0" + std::to_string(day) + "T09:00:00Z");
  for (std::size_t i = 0; i < states.size(); ++i)
    seq.push_back({start + minutes{15 * static_cast<int>(i)}, states[i]});
  return seq;
}

// Independent count of consecutive pairs.
std::map<std::pair<int, int>, std::uint64_t> pair_counts(const std::vector<int>& s) {
  std::map<std::pair<int, int>, std::uint64_t> m;
  for (std::size_t i = 1; i < s.size(); ++i) ++m[{s[i - 1], s[i]}];
  return m;
}

}  // namespace

TEST_CASE("hand-counted single day") {
  const auto t = estimate(one_day({1, 1, 2, 1}), {1, 2}, kUtc);
  CHECK(t.count(1, 1) == 1);
  CHECK(t.count(1, 2) == 1);
  CHECK(t.count(2, 1) == 1);
  CHECK(t.count(2, 2) == 0);
  CHECK(t.probability(1, 1) == 0.5);
  CHECK(t.probability(1, 2) == 0.5);
  CHECK(t.probability(2, 1) == 1.0);
  CHECK(t.probability(2, 2) == 0.0);
}

TEST_CASE("constant sequence") {
  const auto t = estimate(one_day({3, 3, 3}), {3}, kUtc);
  CHECK(t.probability(3, 3) == 1.0);
  CHECK(t.count(3, 3) == 2);
}

TEST_CASE("empty sequence gives zero counts") {
  const auto t = estimate({}, {1, 2}, kUtc);
  CHECK(t.size() == 2);
  CHECK(t.is_zero_row(1));
  CHECK(t.is_zero_row(2));
  CHECK(estimate({}, {}, kUtc).size() == 0);
}

TEST_CASE("overnight pairs are skipped unless requested") {
  auto seq = one_day({1}, 1);
  const auto next = one_day({2}, 2);
  seq.insert(seq.end(), next.begin(), next.end());
  const auto t = estimate(seq, {1, 2}, kUtc);
  CHECK(t.row_total(1) == 0);
  CHECK(t.row_total(2) == 0);

  const auto with = estimate(seq, {1, 2}, kUtc, true);
  CHECK(with.count(1, 2) == 1);
  CHECK(with.probability(1, 2) == 1.0);
}

TEST_CASE("day boundary uses the local date") {
  // 23:30 and 00:30 UTC straddle midnight; at -02:00 both fall on 1 November.
  std::vector<TimedState> seq{{parse_iso8601("2012-11-01T23:30:00Z"), 1},
                              {parse_iso8601("2012-11-02T00:30:00Z"), 2}};
  CHECK(estimate(seq, {1, 2}, kUtc).row_total(1) == 0);
  CHECK(estimate(seq, {1, 2}, UtcOffset{-120}).count(1, 2) == 1);
}

TEST_CASE("zero rows stay zero and are reported") {
  const auto t = estimate(one_day({1, 2}), {1, 2, 3}, kUtc);
  CHECK(t.is_zero_row(2));
  CHECK(t.is_zero_row(3));
  const auto j = to_json(t);
  CHECK(j["zero_rows"] == nlohmann::json::array({2, 3}));
}

TEST_CASE("unknown states and unordered periods are rejected") {
  CHECK_THROWS_AS(estimate(one_day({1, 4}), {1, 2}, kUtc), UnknownStateError);
  const TransitionMatrix t({1, 2});
  CHECK_THROWS_AS(update(t, 1, 9), UnknownStateError);
  CHECK_THROWS_AS(t.count(0, 1), UnknownStateError);
  auto seq = one_day({1, 2});
  std::swap(seq[0], seq[1]);
  CHECK_THROWS_AS(estimate(seq, {1, 2}, kUtc), Error);
}

TEST_CASE("update examples") {
  const TransitionMatrix empty({1, 2});
  const auto a = update(empty, 1, 2);
  CHECK(a.probability(1, 1) == 0.0);
  CHECK(a.probability(1, 2) == 1.0);
  CHECK(a.probability(2, 1) == 0.0);
  CHECK(a.probability(2, 2) == 0.0);
  CHECK(empty.row_total(1) == 0);  // the input is not modified

  const auto b = update(update(empty, 1, 2), 1, 1);
  CHECK(b.probability(1, 1) == 0.5);
  CHECK(b.probability(1, 2) == 0.5);
}

TEST_CASE("update equals re-estimation from the extended sequence") {
  auto rng = RandomStream::keyed(5, {});
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> s(2 + rng.below(30));
    for (auto& x : s) x = 1 + static_cast<int>(rng.below(4));
    auto t = estimate(one_day(std::vector<int>(s.begin(), s.end() - 1)), {1, 2, 3, 4}, kUtc);
    t = update(t, s[s.size() - 2], s.back());
    CHECK(t == estimate(one_day(s), {1, 2, 3, 4}, kUtc));
  }
}

TEST_CASE("concatenation adds the junction pair") {
  auto rng = RandomStream::keyed(6, {});
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> a(1 + rng.below(10)), b(1 + rng.below(10));
    for (auto& x : a) x = 1 + static_cast<int>(rng.below(3));
    for (auto& x : b) x = 1 + static_cast<int>(rng.below(3));
    std::vector<int> ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const auto ta = estimate(one_day(a), {1, 2, 3}, kUtc);
    const auto tb = estimate(one_day(b), {1, 2, 3}, kUtc);
    const auto tab = estimate(one_day(ab), {1, 2, 3}, kUtc);
    const auto want = pair_counts(ab);
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j) {
        const std::uint64_t junction = (a.back() == i && b.front() == j) ? 1 : 0;
        CHECK(tab.count(i, j) == ta.count(i, j) + tb.count(i, j) + junction);
        const auto it = want.find({i, j});
        CHECK(tab.count(i, j) == (it == want.end() ? 0 : it->second));
      }
  }
}

TEST_CASE("rows are stochastic") {
  auto rng = RandomStream::keyed(8, {});
  std::vector<int> s(500);
  for (auto& x : s) x = 1 + static_cast<int>(rng.below(6));
  const auto t = estimate(one_day(s), {1, 2, 3, 4, 5, 6}, kUtc);
  for (int i : t.states()) {
    if (t.is_zero_row(i)) continue;
    double sum = 0;
    for (int j : t.states()) {
      CHECK(t.probability(i, j) >= 0.0);
      CHECK(t.probability(i, j) <= 1.0);
      sum += t.probability(i, j);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("state ids are sorted and de-duplicated") {
  const TransitionMatrix t({5, 2, 5, 9});
  CHECK(t.states() == std::vector<int>{2, 5, 9});
  CHECK(t.index_of(9) == 2);
}

TEST_CASE("online snapshots are immutable") {
  OnlineTransitions online(TransitionMatrix({1, 2}));
  const auto before = online.snapshot();
  online.update(1, 2);
  const auto after = online.snapshot();
  CHECK(before->row_total(1) == 0);
  CHECK(after->probability(1, 2) == 1.0);

  std::atomic<int> torn{0};
  std::thread reader([&] {
    for (int i = 0; i < 1000; ++i) {
      const auto snap = online.snapshot();
      const double p = snap->probability(1, 1) + snap->probability(1, 2);
      if (std::abs(p - 1.0) > 1e-12) ++torn;
    }
  });
  for (int i = 0; i < 1000; ++i) online.update(1, i % 2 + 1);
  reader.join();
  CHECK(torn == 0);
  CHECK(online.snapshot()->row_total(1) == 1001);
}

TEST_CASE("serialization") {
  const auto t = estimate(one_day({1, 1, 2, 1}), {1, 2}, kUtc);
  std::ostringstream csv;
  write_transition_csv(csv, t);
  CHECK(csv.str() == "from\\to,1,2\n1,0.5,0.5\n2,1,0\n");

  const auto j = to_json(t);
  CHECK(j["counts"] == nlohmann::json::parse("[[1,1],[1,0]]"));
  CHECK(j["probabilities"][0][1] == 0.5);
  CHECK(transition_matrix_from_json(nlohmann::json::parse(j.dump())) == t);
  CHECK_THROWS_AS(transition_matrix_from_json(nlohmann::json::parse(R"({"states":[1]})")),
                  FormatError);
}
