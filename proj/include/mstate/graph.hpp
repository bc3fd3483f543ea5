#pragma once

// GEXF 1.2 export of a temporal cluster configuration: one node per period,
// one undirected edge per pair of periods in the same cluster.

#include <chrono>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "mstate/likelihood.hpp"
#include "mstate/timeutil.hpp"

namespace mstate {

enum class TimeOfDay { Morning, Lunch, Afternoon };

// Local-time bucket: before 12:00, 12:00 to 14:00, from 14:00.
TimeOfDay time_of_day(Timestamp t, UtcOffset offset);
std::string_view time_of_day_name(TimeOfDay b);

inline constexpr double kEdgeWeightFloor = 0.01;

// Edge weight max(C_ij, kEdgeWeightFloor).
double edge_weight(double correlation);

// Throws DimensionMismatchError unless s, c and periods all have N entries.
void write_gexf(std::ostream& out, const ClusterConfiguration& s, const CorrelationMatrix& c,
                const std::vector<Timestamp>& periods, UtcOffset offset);

}  // namespace mstate
