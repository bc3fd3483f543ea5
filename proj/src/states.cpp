#include "mstate/states.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "mstate/errors.hpp"
#include "mstate/textio.hpp"

namespace mstate {

std::size_t feature_slot(Feature f) {
  switch (f) {
    case Feature::Price: return 0;
    case Feature::Spread: return 1;
    case Feature::Volume: return 2;
    case Feature::Imbalance: return 3;
  }
  return 0;
}

FeatureVector period_feature_vector(const ReturnsMatrix& returns, std::size_t column) {
  if (column >= returns.period_count())
    throw LookupError("period column " + std::to_string(column) + " out of range");
  std::array<double, 4> sum{};
  std::array<std::size_t, 4> count{};
  for (std::size_t r = 0; r < returns.rows.size(); ++r) {
    const std::size_t k = feature_slot(returns.rows[r].feature);
    sum[k] += returns.values(r, column);
    ++count[k];
  }
  FeatureVector fv;
  fv.period_start = returns.periods[column];
  for (std::size_t k = 0; k < 4; ++k)
    fv.values[k] = count[k] ? sum[k] / static_cast<double>(count[k]) : 0.0;
  return fv;
}

FeatureVector period_feature_vector(const ReturnsMatrix& returns, Timestamp period) {
  const auto it = std::lower_bound(returns.periods.begin(), returns.periods.end(), period);
  if (it == returns.periods.end() || *it != period)
    throw LookupError("period " + format_iso8601(period, UtcOffset{0}) +
                      " is not a column of the returns matrix");
  return period_feature_vector(returns, static_cast<std::size_t>(it - returns.periods.begin()));
}

SsvSet extract_ssvs(const ReturnsMatrix& returns, const ClusterConfiguration& s,
                    const ClusterStats& stats, std::span<const int> significant) {
  if (s.size() != returns.period_count())
    throw DimensionMismatchError("configuration has " + std::to_string(s.size()) +
                                 " periods but the returns matrix has " +
                                 std::to_string(returns.period_count()));
  SsvSet out;
  int next_state = 1;
  for (int label : significant) {
    const ClusterStat* st = stats.find(label);
    if (!st) throw LookupError("cluster " + std::to_string(label) + " not in configuration");
    StateSignatureVector ssv;
    ssv.state = next_state++;
    ssv.cluster = label;
    ssv.intra_correlation = st->c;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] != label) continue;
      const auto fv = period_feature_vector(returns, i);
      for (std::size_t k = 0; k < 4; ++k) ssv.values[k] += fv.values[k];
      ++ssv.member_count;
    }
    for (auto& v : ssv.values) v /= static_cast<double>(ssv.member_count);
    for (const auto& prev : out.states)
      if (prev.values == ssv.values)
        out.warnings.push_back("states " + std::to_string(prev.state) + " and " +
                               std::to_string(ssv.state) + " have identical signatures");
    out.states.push_back(ssv);
  }
  return out;
}

StateAssignment assign_state(const FeatureVector& fv,
                             std::span<const StateSignatureVector> ssvs) {
  if (ssvs.empty()) throw Error("cannot assign a state: no state signatures");
  StateAssignment best{0, 0.0};
  double best_sq = 0.0;
  for (const auto& ssv : ssvs) {
    double sq = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const double d = fv.values[k] - ssv.values[k];
      sq += d * d;
    }
    if (best.state == 0 || sq < best_sq || (sq == best_sq && ssv.state < best.state)) {
      best.state = ssv.state;
      best_sq = sq;
    }
  }
  best.distance = std::sqrt(best_sq);
  return best;
}

nlohmann::json to_json(const StateSignatureVector& ssv) {
  return {{"state", ssv.state},          {"cluster", ssv.cluster},
          {"price", ssv.values[0]},      {"spread", ssv.values[1]},
          {"volume", ssv.values[2]},     {"imbalance", ssv.values[3]},
          {"n", ssv.member_count},       {"c", ssv.intra_correlation}};
}

StateSignatureVector ssv_from_json(const nlohmann::json& j) {
  try {
    StateSignatureVector s;
    s.state = j.at("state").get<int>();
    s.cluster = j.value("cluster", 0);
    s.values = {j.at("price").get<double>(), j.at("spread").get<double>(),
                j.at("volume").get<double>(), j.at("imbalance").get<double>()};
    s.member_count = j.at("n").get<std::size_t>();
    s.intra_correlation = j.at("c").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("state signature: ") + e.what());
  }
}

nlohmann::json to_json(const SsvSet& set) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : set.states) states.push_back(to_json(s));
  return {{"states", states}, {"warnings", set.warnings}};
}

SsvSet ssv_set_from_json(const nlohmann::json& j) {
  SsvSet set;
  if (!j.contains("states") || !j.at("states").is_array())
    throw FormatError("state signatures: missing 'states' array");
  for (const auto& s : j.at("states")) set.states.push_back(ssv_from_json(s));
  if (j.contains("warnings")) set.warnings = j.at("warnings").get<std::vector<std::string>>();
  return set;
}

void write_assignments_csv(std::ostream& out, std::span<const TimedAssignment> rows,
                           UtcOffset offset) {
  out << kAssignmentCsvHeader << '\n';
  for (const auto& r : rows)
    out << format_iso8601(r.period_start, offset) << ',' << r.assignment.state << ','
        << format_number(r.assignment.distance) << '\n';
}

std::vector<TimedAssignment> read_assignments_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kAssignmentCsvHeader)
    throw ParseError(1, "expected header '" + std::string(kAssignmentCsvHeader) + "'");
  std::vector<TimedAssignment> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto f = split_fields(text);
    if (f.size() != 3) throw ParseError(line_no, "expected 3 fields");
    TimedAssignment row;
    try {
      row.period_start = parse_iso8601(f[0]);
    } catch (const FormatError& e) {
      throw ParseError(line_no, e.what());
    }
    const auto state = parse_integer(f[1]);
    const auto dist = parse_number(f[2]);
    if (!state || !dist) throw ParseError(line_no, "non-numeric state or distance");
    row.assignment = {static_cast<int>(*state), *dist};
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mstate
