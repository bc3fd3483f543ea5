#include "mstate/transitions.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "mstate/errors.hpp"
#include "mstate/textio.hpp"

namespace mstate {

TransitionMatrix::TransitionMatrix(std::vector<int> state_ids) : states_(std::move(state_ids)) {
  std::sort(states_.begin(), states_.end());
  states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
  counts_.assign(states_.size() * states_.size(), 0);
  probs_ = Matrix(states_.size(), states_.size());
}

std::size_t TransitionMatrix::index_of(int state) const {
  const auto it = std::lower_bound(states_.begin(), states_.end(), state);
  if (it == states_.end() || *it != state)
    throw UnknownStateError("unknown state id " + std::to_string(state));
  return static_cast<std::size_t>(it - states_.begin());
}

std::uint64_t TransitionMatrix::count(int from, int to) const {
  return counts_[index_of(from) * size() + index_of(to)];
}

double TransitionMatrix::probability(int from, int to) const {
  return probs_(index_of(from), index_of(to));
}

std::uint64_t TransitionMatrix::row_total(int from) const {
  const std::size_t r = index_of(from);
  std::uint64_t total = 0;
  for (std::size_t c = 0; c < size(); ++c) total += counts_[r * size() + c];
  return total;
}

void TransitionMatrix::record(int from, int to) {
  const std::size_t r = index_of(from);
  const std::size_t c = index_of(to);
  ++counts_[r * size() + c];
  renormalize_row(r);
}

void TransitionMatrix::renormalize_row(std::size_t r) {
  std::uint64_t total = 0;
  for (std::size_t c = 0; c < size(); ++c) total += counts_[r * size() + c];
  for (std::size_t c = 0; c < size(); ++c)
    probs_(r, c) = total ? static_cast<double>(counts_[r * size() + c]) /
                               static_cast<double>(total)
                         : 0.0;
}

TransitionMatrix estimate(std::span<const TimedState> sequence, std::vector<int> state_ids,
                          UtcOffset offset, bool include_overnight) {
  TransitionMatrix t(std::move(state_ids));
  for (const auto& s : sequence) t.index_of(s.state);
  for (std::size_t i = 1; i < sequence.size(); ++i) {
    const auto& a = sequence[i - 1];
    const auto& b = sequence[i];
    if (b.period_start <= a.period_start)
      throw Error("state sequence is not in increasing period order");
    if (!include_overnight &&
        to_local(a.period_start, offset).date != to_local(b.period_start, offset).date)
      continue;
    t.record(a.state, b.state);
  }
  return t;
}

TransitionMatrix update(const TransitionMatrix& t, int from, int to) {
  TransitionMatrix next = t;
  next.record(from, to);
  return next;
}

OnlineTransitions::OnlineTransitions(TransitionMatrix initial)
    : current_(std::make_shared<const TransitionMatrix>(std::move(initial))) {}

std::shared_ptr<const TransitionMatrix> OnlineTransitions::snapshot() const {
  std::lock_guard lock(mutex_);
  return current_;
}

void OnlineTransitions::update(int from, int to) {
  auto base = snapshot();
  auto next = std::make_shared<const TransitionMatrix>(mstate::update(*base, from, to));
  std::lock_guard lock(mutex_);
  current_ = std::move(next);
}

void write_transition_csv(std::ostream& out, const TransitionMatrix& t) {
  out << "from\\to";
  for (int s : t.states()) out << ',' << s;
  out << '\n';
  for (std::size_t r = 0; r < t.size(); ++r) {
    out << t.states()[r];
    for (std::size_t c = 0; c < t.size(); ++c)
      out << ',' << format_number(t.probabilities()(r, c));
    out << '\n';
  }
}

nlohmann::json to_json(const TransitionMatrix& t) {
  nlohmann::json counts = nlohmann::json::array();
  nlohmann::json probs = nlohmann::json::array();
  nlohmann::json zero_rows = nlohmann::json::array();
  for (std::size_t r = 0; r < t.size(); ++r) {
    nlohmann::json crow = nlohmann::json::array();
    nlohmann::json prow = nlohmann::json::array();
    for (std::size_t c = 0; c < t.size(); ++c) {
      crow.push_back(t.counts()[r * t.size() + c]);
      prow.push_back(t.probabilities()(r, c));
    }
    counts.push_back(std::move(crow));
    probs.push_back(std::move(prow));
    if (t.is_zero_row(t.states()[r])) zero_rows.push_back(t.states()[r]);
  }
  return {{"states", t.states()},
          {"counts", counts},
          {"probabilities", probs},
          {"zero_rows", zero_rows}};
}

TransitionMatrix transition_matrix_from_json(const nlohmann::json& j) {
  try {
    TransitionMatrix t(j.at("states").get<std::vector<int>>());
    const auto& counts = j.at("counts");
    if (counts.size() != t.size()) throw FormatError("transition counts: wrong row count");
    for (std::size_t r = 0; r < t.size(); ++r) {
      if (counts[r].size() != t.size()) throw FormatError("transition counts: wrong row length");
      for (std::size_t c = 0; c < t.size(); ++c) {
        const auto n = counts[r][c].get<std::uint64_t>();
        for (std::uint64_t k = 0; k < n; ++k) t.record(t.states()[r], t.states()[c]);
      }
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("transition matrix: ") + e.what());
  }
}

}  // namespace mstate
