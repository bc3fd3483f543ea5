#pragma once

// State signature vectors (SSVs) and nearest-signature state assignment.

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mstate/corr.hpp"
#include "mstate/likelihood.hpp"

namespace mstate {

// Cross-instrument mean return of each feature for one period, stored in the
// order price, spread, volume, imbalance.
struct FeatureVector {
  Timestamp period_start;
  std::array<double, 4> values{};

  double price() const { return values[0]; }
  double spread() const { return values[1]; }
  double volume() const { return values[2]; }
  double imbalance() const { return values[3]; }
};

// Position of a feature inside FeatureVector::values.
std::size_t feature_slot(Feature f);

// Mean over instruments of each feature's return in the column whose start
// time is `period`. A feature with no surviving rows contributes 0. Throws
// LookupError when the period is not a column of `returns`.
FeatureVector period_feature_vector(const ReturnsMatrix& returns, Timestamp period);
FeatureVector period_feature_vector(const ReturnsMatrix& returns, std::size_t column);

struct StateSignatureVector {
  int state = 0;          // 1-based, in the order of the significant list
  int cluster = 0;        // label of the source cluster
  std::array<double, 4> values{};
  std::size_t member_count = 0;
  double intra_correlation = 0.0;  // c_s of the source cluster
};

struct SsvSet {
  std::vector<StateSignatureVector> states;
  std::vector<std::string> warnings;
};

// SSV of each significant cluster: the plain mean of its member periods'
// feature vectors. States are numbered 1..K in the order of `significant`.
// Identical signatures are all kept, with a warning.
SsvSet extract_ssvs(const ReturnsMatrix& returns, const ClusterConfiguration& s,
                    const ClusterStats& stats, std::span<const int> significant);

struct StateAssignment {
  int state = 0;
  double distance = 0.0;
};

// Nearest SSV in Euclidean distance; ties go to the lowest state id. Throws
// Error for an empty set.
StateAssignment assign_state(const FeatureVector& fv,
                             std::span<const StateSignatureVector> ssvs);

nlohmann::json to_json(const StateSignatureVector& ssv);
StateSignatureVector ssv_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SsvSet& set);
SsvSet ssv_set_from_json(const nlohmann::json& j);

struct TimedAssignment {
  Timestamp period_start;
  StateAssignment assignment;
};

inline constexpr std::string_view kAssignmentCsvHeader = "period_start,state,distance";
void write_assignments_csv(std::ostream& out, std::span<const TimedAssignment> rows,
                           UtcOffset offset);
std::vector<TimedAssignment> read_assignments_csv(std::istream& in);

}  // namespace mstate
