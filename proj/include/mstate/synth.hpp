#pragma once

// Planted-partition data: each object i in cluster s is
//   x_i(t) = g_s * eta_s(t) + sqrt(1 - g_s^2) * eps_i(t)
// with independent standard normal factors, so same-cluster objects have
// correlation g_s^2 and objects in different clusters are uncorrelated.

#include <cstdint>
#include <vector>

#include "mstate/corr.hpp"
#include "mstate/likelihood.hpp"
#include "mstate/marketdata.hpp"

namespace mstate {

struct PlantedSpec {
  std::vector<std::size_t> cluster_sizes;  // objects are assigned in blocks
  std::vector<double> couplings;           // one per cluster, in [0, 1)
  std::size_t measurements = 0;            // D
  std::uint64_t seed = 0;

  std::size_t object_count() const;
  void validate() const;
};

struct PlantedData {
  ReturnsMatrix returns;       // D x N, columns are the objects
  ClusterConfiguration truth;  // canonical planted labels
};

PlantedData generate(const PlantedSpec& spec);

// Chance-corrected agreement of two partitions of the same objects; 1 means
// identical up to relabeling.
double adjusted_rand_index(const ClusterConfiguration& a, const ClusterConfiguration& b);

// Tick-level market whose bar returns follow the planted model. Return
// periods are objects and the D = 4 * instruments (instrument, feature)
// series are the measurements. Period t belongs to a time-of-day state:
// each session is cut into `states` contiguous blocks.
struct SyntheticMarketSpec {
  SessionCalendar calendar;
  std::size_t instruments = 16;
  std::size_t states = 4;
  double coupling = 0.9;
  std::uint64_t seed = 0;
};

struct SyntheticMarket {
  std::vector<TickRecord> ticks;
  ClusterConfiguration truth;  // over the period_count() - 1 return periods
};

SyntheticMarket generate_market(const SyntheticMarketSpec& spec);

}  // namespace mstate
