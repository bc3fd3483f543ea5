#pragma once

// Empirical one-step transition matrices between market states.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "json.hpp"
#include "mstate/matrix.hpp"
#include "mstate/timeutil.hpp"

namespace mstate {

struct TimedState {
  Timestamp period_start;
  int state = 0;
};

class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  // Zero counts over the given ids (sorted and de-duplicated).
  explicit TransitionMatrix(std::vector<int> state_ids);

  const std::vector<int>& states() const { return states_; }
  std::size_t size() const { return states_.size(); }

  // Throws UnknownStateError for ids outside the state set.
  std::size_t index_of(int state) const;
  std::uint64_t count(int from, int to) const;
  double probability(int from, int to) const;
  std::uint64_t row_total(int from) const;
  // True when the state has no outgoing transitions; its row stays all-zero.
  bool is_zero_row(int from) const { return row_total(from) == 0; }

  const std::vector<std::uint64_t>& counts() const { return counts_; }  // row-major
  const Matrix& probabilities() const { return probs_; }

  // Adds one observation in place and renormalizes that row.
  void record(int from, int to);

  friend bool operator==(const TransitionMatrix&, const TransitionMatrix&) = default;

 private:
  void renormalize_row(std::size_t row);

  std::vector<int> states_;
  std::vector<std::uint64_t> counts_;
  Matrix probs_;
};

// Counts consecutive pairs of the sequence. Unless `include_overnight`, a pair
// whose two periods fall on different local dates is skipped.
TransitionMatrix estimate(std::span<const TimedState> sequence, std::vector<int> state_ids,
                          UtcOffset offset, bool include_overnight = false);

// Copy of `t` with one more (from -> to) observation.
TransitionMatrix update(const TransitionMatrix& t, int from, int to);

// Single-writer, many-reader holder. Readers take an immutable snapshot; an
// update publishes a fresh copy, so a snapshot never changes under a reader.
class OnlineTransitions {
 public:
  explicit OnlineTransitions(TransitionMatrix initial);

  std::shared_ptr<const TransitionMatrix> snapshot() const;
  void update(int from, int to);

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const TransitionMatrix> current_;
};

// Probabilities with a state-id header row and column.
void write_transition_csv(std::ostream& out, const TransitionMatrix& t);
nlohmann::json to_json(const TransitionMatrix& t);
TransitionMatrix transition_matrix_from_json(const nlohmann::json& j);

}  // namespace mstate
