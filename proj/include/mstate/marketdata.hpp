#pragma once

// Tick ingestion and per-period bar aggregation.

#include <chrono>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mstate/timeutil.hpp"

namespace mstate {

enum class TickKind { Trade, Quote };

// One trade or top-of-book quote. Only the fields of the record's kind are
// meaningful: price/volume for trades, bid/ask/bid_size/ask_size for quotes.
struct TickRecord {
  Timestamp timestamp;
  std::string instrument;
  TickKind kind = TickKind::Trade;
  double price = 0.0;
  double volume = 0.0;
  double bid = 0.0;
  double ask = 0.0;
  double bid_size = 0.0;
  double ask_size = 0.0;
};

inline constexpr std::string_view kTickCsvHeader =
    "timestamp,instrument,kind,price,volume,bid,ask,bid_size,ask_size";
inline constexpr std::string_view kBarCsvHeader =
    "instrument,period_start,trade_price,trade_volume,spread,quote_imbalance";

// Reads the tick CSV. Throws ParseError (with the 1-based line number) on
// schema violations and OrderingError when an instrument's timestamps go
// backwards.
std::vector<TickRecord> parse_ticks(std::istream& in);

void write_ticks(std::ostream& out, const std::vector<TickRecord>& ticks,
                 UtcOffset offset);

// Trading days and the continuous session sampled into fixed-width bars.
struct SessionCalendar {
  std::vector<std::chrono::sys_days> days;  // ascending, unique
  std::chrono::minutes open{9 * 60};
  std::chrono::minutes close{17 * 60};
  std::chrono::minutes bar_width{15};
  UtcOffset utc_offset{0};

  // Throws Error unless bar width is one of 5/15/30/60 and divides the
  // session, days are sorted and unique, and open < close.
  void validate() const;
  std::size_t periods_per_day() const;
  std::size_t period_count() const { return days.size() * periods_per_day(); }
  Timestamp period_start(std::size_t period_index) const;
  // Period containing `t`, or nullopt outside the sessions.
  std::optional<std::size_t> period_of(Timestamp t) const;
  // Day index of a timestamp's local date, or nullopt for non-trading days.
  std::optional<std::size_t> day_of(Timestamp t) const;
};

// Trading days present in the ticks, i.e. local dates with at least one tick
// inside the session window.
std::vector<std::chrono::sys_days> infer_trading_days(
    const std::vector<TickRecord>& ticks, const SessionCalendar& session);

struct PeriodBar {
  std::string instrument;
  std::size_t period_index = 0;
  Timestamp period_start;
  std::optional<double> trade_price;  // missing until the first trade
  double trade_volume = 0.0;
  std::optional<double> spread;
  std::optional<double> quote_imbalance;

  friend bool operator==(const PeriodBar&, const PeriodBar&) = default;
};

// Bars for every (instrument, period); instruments sorted by name and bars
// stored in period order.
struct BarTable {
  std::vector<std::string> instruments;
  std::vector<Timestamp> period_starts;
  std::vector<std::vector<PeriodBar>> bars;  // [instrument][period]
  std::vector<std::string> warnings;

  friend bool operator==(const BarTable& a, const BarTable& b) {
    return a.instruments == b.instruments && a.period_starts == b.period_starts &&
           a.bars == b.bars;
  }
};

// Streaming fold of ticks into bars. Feeding the same per-instrument tick
// order in any chunking or cross-instrument interleaving gives the same table.
class BarAggregator {
 public:
  explicit BarAggregator(SessionCalendar calendar);

  void add(const TickRecord& tick);
  BarTable finish() const;

 private:
  struct Accum {
    std::optional<double> last_price;
    double volume = 0.0;
    double spread_sum = 0.0;
    std::size_t spread_n = 0;
    double imbalance_sum = 0.0;
    std::size_t imbalance_n = 0;
  };

  SessionCalendar calendar_;
  std::map<std::string, std::vector<Accum>> accum_;
};

BarTable aggregate(const std::vector<TickRecord>& ticks,
                   const SessionCalendar& calendar);

void write_bars(std::ostream& out, const BarTable& table, UtcOffset offset);
BarTable read_bars(std::istream& in);

}  // namespace mstate
