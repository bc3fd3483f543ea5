#include "mstate/corr.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "mstate/errors.hpp"
#include "mstate/parallel.hpp"
#include "mstate/textio.hpp"

namespace mstate {

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::Price: return "trade_price";
    case Feature::Volume: return "trade_volume";
    case Feature::Spread: return "spread";
    case Feature::Imbalance: return "quote_imbalance";
  }
  return "?";
}

Feature parse_feature(std::string_view name) {
  for (Feature f : kAllFeatures)
    if (feature_name(f) == name) return f;
  throw FormatError("unknown feature '" + std::string(name) + "'");
}

std::string SeriesLabel::to_string() const {
  return instrument + ":" + std::string(feature_name(feature));
}

namespace {

std::optional<double> level(const PeriodBar& b, Feature f) {
  switch (f) {
    case Feature::Price: return b.trade_price;
    case Feature::Volume: return b.trade_volume;
    case Feature::Spread: return b.spread;
    case Feature::Imbalance: return b.quote_imbalance;
  }
  return std::nullopt;
}

}  // namespace

ReturnsMatrix feature_returns(const BarTable& bars) {
  const std::size_t n_periods = bars.period_starts.size();
  if (n_periods < 4)
    throw InsufficientDataError("need at least 3 return periods, have " +
                                std::to_string(n_periods == 0 ? 0 : n_periods - 1));
  const std::size_t n_cols = n_periods - 1;

  ReturnsMatrix out;
  out.periods.assign(bars.period_starts.begin() + 1, bars.period_starts.end());
  std::vector<double> cells;
  std::vector<double> row(n_cols);

  for (std::size_t k = 0; k < bars.instruments.size(); ++k) {
    const auto& series = bars.bars[k];
    for (Feature f : kAllFeatures) {
      bool defined = true;
      for (std::size_t t = 1; t < n_periods && defined; ++t) {
        const auto prev = level(series[t - 1], f);
        const auto cur = level(series[t], f);
        if (!prev || !cur) {
          defined = false;
          break;
        }
        row[t - 1] = *prev == 0.0 ? 0.0 : (*cur - *prev) / *prev;
      }
      SeriesLabel label{bars.instruments[k], f};
      if (!defined) {
        out.warnings.push_back("dropped " + label.to_string() +
                               ": undefined return (missing level)");
        continue;
      }
      out.rows.push_back(std::move(label));
      cells.insert(cells.end(), row.begin(), row.end());
    }
  }
  if (out.rows.empty()) throw InsufficientDataError("no series with complete returns");

  out.values = Matrix(out.rows.size(), n_cols);
  std::copy(cells.begin(), cells.end(), out.values.data().begin());
  return out;
}

ReturnsMatrix standardize_rows(const ReturnsMatrix& in) {
  const std::size_t n = in.period_count();
  if (n < 2) throw InsufficientDataError("standardization needs at least 2 periods");

  ReturnsMatrix out;
  out.periods = in.periods;
  out.warnings = in.warnings;
  std::vector<double> cells;
  for (std::size_t r = 0; r < in.series_count(); ++r) {
    const auto x = in.values.row(r);
    double mean = 0.0;
    double scale = 0.0;
    for (double v : x) {
      mean += v;
      scale = std::max(scale, std::abs(v));
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    // Constant rows can leave rounding residue in the mean; treat a standard
    // deviation at the rounding level of the data as zero.
    if (!(sd > 1e-12 * std::max(1.0, scale))) {
      out.warnings.push_back("dropped " + in.rows[r].to_string() + ": zero variance");
      continue;
    }
    out.rows.push_back(in.rows[r]);
    for (double v : x) cells.push_back((v - mean) / sd);
  }
  if (out.rows.empty()) throw EmptyMatrixError("every series has zero variance");
  out.values = Matrix(out.rows.size(), n);
  std::copy(cells.begin(), cells.end(), out.values.data().begin());
  return out;
}

CorrelationMatrix period_correlation(const ReturnsMatrix& m, unsigned threads) {
  const std::size_t d = m.series_count();
  const std::size_t n = m.period_count();

  // Column-major copy so each dot product walks contiguous memory.
  std::vector<double> cols(n * d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < n; ++c) cols[c * d + r] = m.values(r, c);

  std::vector<double> norms(n);
  for (std::size_t c = 0; c < n; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < d; ++r) s += cols[c * d + r] * cols[c * d + r];
    norms[c] = std::sqrt(s);
    if (!(norms[c] > 0.0)) {
      const std::string label =
          c < m.periods.size() ? format_iso8601(m.periods[c], UtcOffset{0})
                               : std::to_string(c);
      throw DegeneratePeriodError("period " + label + " has a zero-norm column");
    }
  }

  CorrelationMatrix out(n, n);
  parallel_for(n, threads, [&](std::size_t i) {
    const double* xi = cols.data() + i * d;
    out(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* xj = cols.data() + j * d;
      double s = 0.0;
      for (std::size_t r = 0; r < d; ++r) s += xi[r] * xj[r];
      out(i, j) = s / (norms[i] * norms[j]);
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out(j, i) = out(i, j);
  return out;
}

void write_returns_csv(std::ostream& out, const ReturnsMatrix& m, UtcOffset offset) {
  out << "series";
  for (auto t : m.periods) out << ',' << format_iso8601(t, offset);
  out << '\n';
  for (std::size_t r = 0; r < m.series_count(); ++r) {
    out << m.rows[r].to_string();
    for (double v : m.values.row(r)) out << ',' << format_number(v);
    out << '\n';
  }
}

ReturnsMatrix read_returns_csv(std::istream& in) {
  ReturnsMatrix m;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "empty returns file");
  {
    const auto f = split_fields(trim(line));
    if (f.empty() || trim(f[0]) != "series") throw ParseError(1, "unexpected header");
    for (std::size_t i = 1; i < f.size(); ++i) {
      try {
        m.periods.push_back(parse_iso8601(trim(f[i])));
      } catch (const FormatError& e) {
        throw ParseError(1, e.what());
      }
    }
  }
  std::vector<double> cells;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto f = split_fields(text);
    if (f.size() != m.periods.size() + 1)
      throw ParseError(line_no, "column count does not match header");
    const auto label = trim(f[0]);
    const auto colon = label.rfind(':');
    if (colon == std::string_view::npos) throw ParseError(line_no, "bad series label");
    SeriesLabel sl;
    sl.instrument = std::string(label.substr(0, colon));
    try {
      sl.feature = parse_feature(label.substr(colon + 1));
    } catch (const FormatError& e) {
      throw ParseError(line_no, e.what());
    }
    m.rows.push_back(std::move(sl));
    for (std::size_t i = 1; i < f.size(); ++i) {
      const auto v = parse_number(f[i]);
      if (!v) throw ParseError(line_no, "non-numeric value '" + std::string(f[i]) + "'");
      cells.push_back(*v);
    }
  }
  m.values = Matrix(m.rows.size(), m.periods.size());
  std::copy(cells.begin(), cells.end(), m.values.data().begin());
  return m;
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& c,
                           const std::vector<Timestamp>& periods, UtcOffset offset) {
  if (periods.size() != c.rows())
    throw DimensionMismatchError("period labels do not match correlation size");
  std::vector<std::string> labels;
  labels.reserve(periods.size());
  for (auto t : periods) labels.push_back(format_iso8601(t, offset));
  out << "period";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < c.rows(); ++i) {
    out << labels[i];
    for (double v : c.row(i)) out << ',' << format_number(v);
    out << '\n';
  }
}

static_assert(std::endian::native == std::endian::little,
              "binary correlation codec assumes a little-endian host");

std::string encode_correlation_binary(const CorrelationMatrix& c) {
  if (c.rows() != c.cols()) throw DimensionMismatchError("correlation must be square");
  const auto n = static_cast<std::uint32_t>(c.rows());
  std::string bytes(kCorrelationMagic);
  bytes.append(reinterpret_cast<const char*>(&n), sizeof n);
  const auto data = c.data();
  bytes.append(reinterpret_cast<const char*>(data.data()), data.size_bytes());
  return bytes;
}

CorrelationMatrix decode_correlation_binary(std::string_view bytes) {
  const std::size_t header = kCorrelationMagic.size() + sizeof(std::uint32_t);
  if (bytes.size() < header || bytes.substr(0, kCorrelationMagic.size()) != kCorrelationMagic)
    throw FormatError("not a GMCORR1 file");
  std::uint32_t n = 0;
  std::memcpy(&n, bytes.data() + kCorrelationMagic.size(), sizeof n);
  const std::size_t expected = header + std::size_t{n} * n * sizeof(double);
  if (bytes.size() != expected)
    throw FormatError("GMCORR1 payload has " + std::to_string(bytes.size()) +
                      " bytes, expected " + std::to_string(expected));
  CorrelationMatrix c(n, n);
  std::memcpy(c.data().data(), bytes.data() + header, c.data().size_bytes());
  return c;
}

}  // namespace mstate
