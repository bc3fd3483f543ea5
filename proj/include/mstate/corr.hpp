#pragma once

// Feature returns, the stacked returns matrix and the period-by-period
// correlation matrix that drives the clustering.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "mstate/marketdata.hpp"
#include "mstate/matrix.hpp"

namespace mstate {

enum class Feature { Price = 0, Volume = 1, Spread = 2, Imbalance = 3 };

inline constexpr std::array<Feature, 4> kAllFeatures = {
    Feature::Price, Feature::Volume, Feature::Spread, Feature::Imbalance};

std::string_view feature_name(Feature f);
Feature parse_feature(std::string_view name);

struct SeriesLabel {
  std::string instrument;
  Feature feature = Feature::Price;

  std::string to_string() const;
  friend bool operator==(const SeriesLabel&, const SeriesLabel&) = default;
};

// Rows are (instrument, feature) series; columns are time periods in strictly
// increasing order. Matrix dimensions are D x N.
struct ReturnsMatrix {
  std::vector<SeriesLabel> rows;
  std::vector<Timestamp> periods;
  Matrix values;
  std::vector<std::string> warnings;

  std::size_t series_count() const { return rows.size(); }
  std::size_t period_count() const { return periods.size(); }
};

// Relative change (f_t - f_{t-1}) / f_{t-1}, with 0 when f_{t-1} is 0. The
// first period has no return and is dropped. Rows with any undefined return
// (a missing level on either side) are dropped with a warning. Throws
// InsufficientDataError when fewer than 3 return periods remain.
ReturnsMatrix feature_returns(const BarTable& bars);

// Zero mean and unit sample (n-1) standard deviation per row. Constant rows are
// removed with a warning; throws EmptyMatrixError if none survive.
ReturnsMatrix standardize_rows(const ReturnsMatrix& returns);

// N x N Pearson correlation between period columns of a standardized matrix.
using CorrelationMatrix = Matrix;

// C_ij = <col i, col j> / (|col i| |col j|), diagonal exactly 1. Each entry
// sums over rows in order, so the result does not depend on `threads`. Throws
// DegeneratePeriodError naming the first zero-norm column.
CorrelationMatrix period_correlation(const ReturnsMatrix& standardized,
                                     unsigned threads = 1);

void write_returns_csv(std::ostream& out, const ReturnsMatrix& m, UtcOffset offset);
ReturnsMatrix read_returns_csv(std::istream& in);

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& c,
                           const std::vector<Timestamp>& periods, UtcOffset offset);

// Binary layout: ASCII magic "GMCORR1", little-endian u32 N, then N*N
// little-endian f64 in row-major order.
inline constexpr std::string_view kCorrelationMagic = "GMCORR1";
std::string encode_correlation_binary(const CorrelationMatrix& c);
CorrelationMatrix decode_correlation_binary(std::string_view bytes);

}  // namespace mstate
