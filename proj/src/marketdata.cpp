#include "mstate/marketdata.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mstate/errors.hpp"
#include "mstate/textio.hpp"

namespace mstate {

namespace {

using namespace std::chrono;

double require_number(std::string_view field, std::size_t line,
                      std::string_view name) {
  const auto v = parse_number(field);
  if (!v || !std::isfinite(*v))
    throw ParseError(line, "non-numeric " + std::string(name) + " '" +
                               std::string(field) + "'");
  return *v;
}

void require_empty(std::string_view field, std::size_t line,
                   std::string_view name, std::string_view kind) {
  if (!trim(field).empty())
    throw ParseError(line, std::string(name) + " must be empty on " +
                               std::string(kind) + " rows");
}

}  // namespace

std::vector<TickRecord> parse_ticks(std::istream& in) {
  std::vector<TickRecord> out;
  std::unordered_map<std::string, Timestamp> last_seen;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++line_no;
  if (trim(line) != kTickCsvHeader)
    throw ParseError(line_no, "unexpected header '" + std::string(trim(line)) + "'");

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto f = split_fields(text);
    if (f.size() != 9)
      throw ParseError(line_no, "expected 9 columns, found " + std::to_string(f.size()));

    TickRecord t;
    try {
      t.timestamp = parse_iso8601(trim(f[0]));
    } catch (const FormatError& e) {
      throw ParseError(line_no, e.what());
    }
    t.instrument = std::string(trim(f[1]));
    if (t.instrument.empty()) throw ParseError(line_no, "empty instrument");

    const auto kind = trim(f[2]);
    if (kind == "T") {
      t.kind = TickKind::Trade;
      t.price = require_number(f[3], line_no, "price");
      t.volume = require_number(f[4], line_no, "volume");
      for (std::size_t i = 5; i < 9; ++i) require_empty(f[i], line_no, "quote field", "trade");
      if (t.price <= 0) throw ParseError(line_no, "trade price must be positive");
      if (t.volume <= 0) throw ParseError(line_no, "trade volume must be positive");
    } else if (kind == "Q") {
      t.kind = TickKind::Quote;
      require_empty(f[3], line_no, "price", "quote");
      require_empty(f[4], line_no, "volume", "quote");
      t.bid = require_number(f[5], line_no, "bid");
      t.ask = require_number(f[6], line_no, "ask");
      t.bid_size = require_number(f[7], line_no, "bid_size");
      t.ask_size = require_number(f[8], line_no, "ask_size");
      if (t.bid <= 0) throw ParseError(line_no, "bid must be positive");
      if (t.ask < t.bid) throw ParseError(line_no, "crossed quote (ask < bid)");
      if (t.bid_size < 0 || t.ask_size < 0)
        throw ParseError(line_no, "negative quote size");
    } else {
      throw ParseError(line_no, "kind must be T or Q, got '" + std::string(kind) + "'");
    }

    auto [it, inserted] = last_seen.try_emplace(t.instrument, t.timestamp);
    if (!inserted) {
      if (t.timestamp < it->second)
        throw OrderingError(line_no, "timestamp regression for " + t.instrument);
      it->second = t.timestamp;
    }
    out.push_back(std::move(t));
  }
  return out;
}

void write_ticks(std::ostream& out, const std::vector<TickRecord>& ticks,
                 UtcOffset offset) {
  out << kTickCsvHeader << '\n';
  for (const auto& t : ticks) {
    out << format_iso8601(t.timestamp, offset) << ',' << t.instrument << ',';
    if (t.kind == TickKind::Trade) {
      out << "T," << format_number(t.price) << ',' << format_number(t.volume)
          << ",,,,\n";
    } else {
      out << "Q,,," << format_number(t.bid) << ',' << format_number(t.ask) << ','
          << format_number(t.bid_size) << ',' << format_number(t.ask_size) << '\n';
    }
  }
}

// --- SessionCalendar -------------------------------------------------------

void SessionCalendar::validate() const {
  const auto w = bar_width.count();
  if (w != 5 && w != 15 && w != 30 && w != 60)
    throw Error("bar width must be 5, 15, 30 or 60 minutes");
  if (open < minutes{0} || close > minutes{24 * 60} || open >= close)
    throw Error("session open must precede close within one day");
  if ((close - open).count() % w != 0)
    throw Error("session length is not a multiple of the bar width");
  for (std::size_t i = 1; i < days.size(); ++i)
    if (days[i] <= days[i - 1]) throw Error("trading days must be ascending and unique");
}

std::size_t SessionCalendar::periods_per_day() const {
  return static_cast<std::size_t>((close - open) / bar_width);
}

Timestamp SessionCalendar::period_start(std::size_t period_index) const {
  const std::size_t ppd = periods_per_day();
  const auto day = days.at(period_index / ppd);
  const auto slot = static_cast<long long>(period_index % ppd);
  const auto local = day + open + bar_width * slot;
  return Timestamp{duration_cast<nanoseconds>(local.time_since_epoch() - utc_offset)};
}

std::optional<std::size_t> SessionCalendar::day_of(Timestamp t) const {
  const auto local = to_local(t, utc_offset);
  const auto it = std::lower_bound(days.begin(), days.end(), local.date);
  if (it == days.end() || *it != local.date) return std::nullopt;
  return static_cast<std::size_t>(it - days.begin());
}

std::optional<std::size_t> SessionCalendar::period_of(Timestamp t) const {
  const auto day = day_of(t);
  if (!day) return std::nullopt;
  const auto tod = to_local(t, utc_offset).since_midnight;
  if (tod < open || tod >= close) return std::nullopt;
  const auto slot = static_cast<std::size_t>((tod - open) / bar_width);
  return *day * periods_per_day() + slot;
}

std::vector<sys_days> infer_trading_days(const std::vector<TickRecord>& ticks,
                                         const SessionCalendar& session) {
  std::set<sys_days> found;
  for (const auto& t : ticks) {
    const auto local = to_local(t.timestamp, session.utc_offset);
    if (local.since_midnight >= session.open && local.since_midnight < session.close)
      found.insert(local.date);
  }
  return {found.begin(), found.end()};
}

// --- aggregation -----------------------------------------------------------

BarAggregator::BarAggregator(SessionCalendar calendar)
    : calendar_(std::move(calendar)) {
  calendar_.validate();
}

void BarAggregator::add(const TickRecord& tick) {
  auto& acc = accum_[tick.instrument];
  const auto period = calendar_.period_of(tick.timestamp);
  if (!period) return;  // outside continuous trading
  if (acc.empty()) acc.resize(calendar_.period_count());
  auto& a = acc[*period];
  if (tick.kind == TickKind::Trade) {
    a.last_price = tick.price;
    a.volume += tick.volume;
  } else {
    a.spread_sum += tick.ask - tick.bid;
    ++a.spread_n;
    const double depth = tick.bid_size + tick.ask_size;
    if (depth > 0) {
      a.imbalance_sum += tick.bid_size / depth;
      ++a.imbalance_n;
    }
  }
}

BarTable BarAggregator::finish() const {
  BarTable table;
  const std::size_t n = calendar_.period_count();
  table.period_starts.reserve(n);
  for (std::size_t p = 0; p < n; ++p) table.period_starts.push_back(calendar_.period_start(p));

  for (const auto& [name, acc] : accum_) {  // std::map: sorted by name
    if (acc.empty()) {
      table.warnings.push_back("instrument " + name +
                               " has no ticks inside the calendar; dropped");
      continue;
    }
    std::vector<PeriodBar> bars;
    bars.reserve(n);
    std::optional<double> price, spread, imbalance;
    for (std::size_t p = 0; p < n; ++p) {
      const auto& a = acc[p];
      if (a.last_price) price = a.last_price;
      if (a.spread_n > 0) spread = a.spread_sum / static_cast<double>(a.spread_n);
      if (a.imbalance_n > 0)
        imbalance = a.imbalance_sum / static_cast<double>(a.imbalance_n);
      bars.push_back(PeriodBar{name, p, table.period_starts[p], price, a.volume,
                               spread, imbalance});
    }
    table.instruments.push_back(name);
    table.bars.push_back(std::move(bars));
  }
  return table;
}

BarTable aggregate(const std::vector<TickRecord>& ticks,
                   const SessionCalendar& calendar) {
  BarAggregator agg(calendar);
  for (const auto& t : ticks) agg.add(t);
  return agg.finish();
}

namespace {

std::string optional_field(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace

void write_bars(std::ostream& out, const BarTable& table, UtcOffset offset) {
  out << kBarCsvHeader << '\n';
  for (const auto& series : table.bars) {
    for (const auto& b : series) {
      out << b.instrument << ',' << format_iso8601(b.period_start, offset) << ','
          << optional_field(b.trade_price) << ',' << format_number(b.trade_volume)
          << ',' << optional_field(b.spread) << ','
          << optional_field(b.quote_imbalance) << '\n';
    }
  }
}

BarTable read_bars(std::istream& in) {
  BarTable table;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || trim(line) != kBarCsvHeader)
    throw ParseError(1, "unexpected bar header");

  auto optional_number = [&](std::string_view f, std::string_view name) {
    if (trim(f).empty()) return std::optional<double>{};
    return std::optional<double>{require_number(f, line_no, name)};
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto f = split_fields(text);
    if (f.size() != 6) throw ParseError(line_no, "expected 6 columns");
    PeriodBar b;
    b.instrument = std::string(trim(f[0]));
    try {
      b.period_start = parse_iso8601(trim(f[1]));
    } catch (const FormatError& e) {
      throw ParseError(line_no, e.what());
    }
    b.trade_price = optional_number(f[2], "trade_price");
    b.trade_volume = require_number(f[3], line_no, "trade_volume");
    b.spread = optional_number(f[4], "spread");
    b.quote_imbalance = optional_number(f[5], "quote_imbalance");

    if (table.instruments.empty() || table.instruments.back() != b.instrument) {
      if (std::find(table.instruments.begin(), table.instruments.end(),
                    b.instrument) != table.instruments.end())
        throw ParseError(line_no, "bars for " + b.instrument + " are not contiguous");
      table.instruments.push_back(b.instrument);
      table.bars.emplace_back();
    }
    auto& series = table.bars.back();
    b.period_index = series.size();
    if (table.bars.size() == 1) {
      table.period_starts.push_back(b.period_start);
    } else if (b.period_index >= table.period_starts.size() ||
               table.period_starts[b.period_index] != b.period_start) {
      throw ParseError(line_no, "period grid of " + b.instrument +
                                    " differs from the first instrument");
    }
    series.push_back(std::move(b));
  }
  for (std::size_t i = 0; i < table.bars.size(); ++i)
    if (table.bars[i].size() != table.period_starts.size())
      throw FormatError("instrument " + table.instruments[i] + " has missing bars");
  return table;
}

}  // namespace mstate
