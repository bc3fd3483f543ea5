#include <map>
#include <sstream>

#include "doctest.h"
#include "mstate/errors.hpp"
#include "mstate/marketdata.hpp"
#include "mstate/rng.hpp"
#include "mstate/synth.hpp"

using namespace mstate;
using namespace std::chrono;

namespace {

std::vector<TickRecord> parse(const std::string& body) {
  std::istringstream in(std::string(kTickCsvHeader) + "\n" + body);
  return parse_ticks(in);
}

SessionCalendar one_day(int width = 15) {
  SessionCalendar cal;
  cal.days = {parse_date("2012-11-01")};
  cal.bar_width = minutes{width};
  return cal;
}

TickRecord trade(const char* ts, const char* inst, double price, double volume) {
  TickRecord t;
  t.timestamp = parse_iso8601(ts);
  t.instrument = inst;
  t.kind = TickKind::Trade;
  t.price = price;
  t.volume = volume;
  return t;
}

TickRecord quote(const char* ts, const char* inst, double bid, double ask, double bs, double as) {
  TickRecord t;
  t.timestamp = parse_iso8601(ts);
  t.instrument = inst;
  t.kind = TickKind::Quote;
  t.bid = bid;
  t.ask = ask;
  t.bid_size = bs;
  t.ask_size = as;
  return t;
}

}  // namespace

TEST_CASE("a valid trade row maps to one trade record") {
  const auto ticks = parse("2012-11-01T09:00:01Z,AGL,T,10.5,200,,,,\n");
  REQUIRE(ticks.size() == 1);
  CHECK(ticks[0].kind == TickKind::Trade);
  CHECK(ticks[0].instrument == "AGL");
  CHECK(ticks[0].price == 10.5);
  CHECK(ticks[0].volume == 200);
}

TEST_CASE("header only gives no records") { CHECK(parse("").empty()); }

TEST_CASE("crossed quotes are rejected") {
  try {
    parse("2012-11-01T09:00:01Z,AGL,Q,,,10.5,10.4,100,100\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("crossed quote") != std::string::npos);
    CHECK(e.line() == 2);
  }
}

TEST_CASE("schema violations name the line") {
  CHECK_THROWS_AS(parse("2012-11-01T09:00:01Z,AGL,T,10.5,200,,,\n"), ParseError);
  CHECK_THROWS_AS(parse("2012-11-01T09:00:01Z,AGL,T,abc,200,,,,\n"), ParseError);
  CHECK_THROWS_AS(parse("2012-11-01T09:00:01Z,AGL,X,10,200,,,,\n"), ParseError);
  CHECK_THROWS_AS(parse("2012-11-01T09:00:01Z,AGL,T,10,200,1,,,\n"), ParseError);
  CHECK_THROWS_AS(parse("2012-11-01T09:00:01Z,AGL,T,-1,200,,,,\n"), ParseError);
  CHECK_THROWS_AS(parse("2012-11-01T09:00:01Z,AGL,Q,,,10,11,-1,5\n"), ParseError);
  try {
    parse("2012-11-01T09:00:01Z,AGL,T,10,1,,,,\n2012-11-01T09:00:02Z,AGL,T,10,x,,,,\n");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("timestamp regression within an instrument is an ordering error") {
  CHECK_THROWS_AS(parse("2012-11-01T09:00:02Z,AGL,T,10,1,,,,\n"
                        "2012-11-01T09:00:01Z,AGL,T,10,1,,,,\n"),
                  OrderingError);
  // Other instruments may interleave freely.
  CHECK(parse("2012-11-01T09:00:02Z,AGL,T,10,1,,,,\n"
              "2012-11-01T09:00:01Z,SBK,T,10,1,,,,\n")
            .size() == 2);
}

TEST_CASE("tick csv round trip") {
  std::vector<TickRecord> ticks = {trade("2012-11-01T09:00:01Z", "A", 10.25, 3),
                                   quote("2012-11-01T09:00:02Z", "A", 10, 10.5, 100, 300)};
  std::ostringstream out;
  write_ticks(out, ticks, minutes{120});
  std::istringstream in(out.str());
  const auto back = parse_ticks(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].timestamp == ticks[0].timestamp);
  CHECK(back[1].ask_size == 300);
}

TEST_CASE("calendar geometry") {
  auto cal = one_day();
  cal.days.push_back(parse_date("2012-11-02"));
  CHECK(cal.periods_per_day() == 32);
  CHECK(cal.period_count() == 64);
  CHECK(cal.period_start(33) == parse_iso8601("2012-11-02T09:15:00Z"));
  CHECK(cal.period_of(parse_iso8601("2012-11-01T16:59:59Z")) == std::optional<std::size_t>(31));
  CHECK_FALSE(cal.period_of(parse_iso8601("2012-11-01T17:00:00Z")).has_value());
  CHECK_FALSE(cal.period_of(parse_iso8601("2012-11-01T08:59:59Z")).has_value());
  cal.bar_width = minutes{7};
  CHECK_THROWS(cal.validate());
}

TEST_CASE("calendar honours the utc offset") {
  auto cal = one_day();
  cal.utc_offset = minutes{120};
  CHECK(cal.period_start(0) == parse_iso8601("2012-11-01T07:00:00Z"));
  CHECK(cal.period_of(parse_iso8601("2012-11-01T07:20:00Z")) == std::optional<std::size_t>(1));
}

TEST_CASE("last price and summed volume per period") {
  const auto table = aggregate({trade("2012-11-01T09:01:00Z", "A", 10, 1),
                                trade("2012-11-01T09:02:00Z", "A", 11, 2),
                                trade("2012-11-01T09:03:00Z", "A", 12, 3)},
                               one_day());
  REQUIRE(table.instruments.size() == 1);
  const auto& b = table.bars[0][0];
  CHECK(b.trade_price == 12.0);
  CHECK(b.trade_volume == 6.0);
}

TEST_CASE("quote-only period") {
  const auto table =
      aggregate({quote("2012-11-01T09:01:00Z", "A", 99.5, 100.5, 100, 300)}, one_day());
  const auto& b = table.bars[0][0];
  CHECK(b.spread == 1.0);
  CHECK(b.quote_imbalance == 0.25);
  CHECK(b.trade_volume == 0.0);
  CHECK_FALSE(b.trade_price.has_value());
}

TEST_CASE("forward fill and leading gaps") {
  const auto table = aggregate({quote("2012-11-01T09:01:00Z", "A", 10, 11, 1, 1),
                                trade("2012-11-01T09:20:00Z", "A", 10.5, 5)},
                               one_day());
  const auto& bars = table.bars[0];
  CHECK_FALSE(bars[0].trade_price.has_value());
  CHECK(bars[1].trade_price == 10.5);
  CHECK(bars[5].trade_price == 10.5);
  CHECK(bars[5].trade_volume == 0.0);
  CHECK(bars[5].spread == 1.0);
  CHECK(bars[5].quote_imbalance == 0.5);
}

TEST_CASE("auction prints and instruments without session ticks") {
  const auto table = aggregate({trade("2012-11-01T08:55:00Z", "A", 99, 1000),
                                trade("2012-11-01T08:56:00Z", "B", 99, 1000),
                                trade("2012-11-01T09:05:00Z", "A", 10, 1),
                                trade("2012-11-01T17:01:00Z", "A", 98, 1000)},
                               one_day());
  REQUIRE(table.instruments == std::vector<std::string>{"A"});
  CHECK(table.warnings.size() == 1);
  double total = 0;
  for (const auto& b : table.bars[0]) total += b.trade_volume;
  CHECK(total == 1.0);
}

TEST_CASE("trading days inferred from in-session ticks") {
  const auto cal = one_day();
  const auto days = infer_trading_days({trade("2012-11-01T08:00:00Z", "A", 1, 1),
                                        trade("2012-11-02T10:00:00Z", "A", 1, 1),
                                        trade("2012-11-05T10:00:00Z", "A", 1, 1)},
                                       cal);
  REQUIRE(days.size() == 2);
  CHECK(format_date(days[0]) == "2012-11-02");
}

TEST_CASE("bar csv round trip") {
  const auto table = aggregate({trade("2012-11-01T09:01:00Z", "A", 10, 1),
                                quote("2012-11-01T09:31:00Z", "B", 10, 10.5, 3, 1)},
                               one_day(60));
  std::ostringstream out;
  write_bars(out, table, minutes{60});
  std::istringstream in(out.str());
  CHECK(read_bars(in) == table);
}

// Property: aggregation is a fold, so per-instrument order is all that
// matters; any chunking and any cross-instrument interleaving agree.
TEST_CASE("aggregation is invariant to chunking and interleaving") {
  SyntheticMarketSpec spec;
  spec.calendar = one_day();
  spec.calendar.days.push_back(parse_date("2012-11-02"));
  spec.instruments = 5;
  spec.seed = 11;
  const auto ticks = generate_market(spec).ticks;
  const auto reference = aggregate(ticks, spec.calendar);

  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    auto rng = RandomStream::keyed(trial, {});
    // Random merge of per-instrument queues.
    std::map<std::string, std::vector<TickRecord>> queues;
    for (const auto& t : ticks) queues[t.instrument].push_back(t);
    std::map<std::string, std::size_t> pos;
    std::vector<TickRecord> shuffled;
    while (shuffled.size() < ticks.size()) {
      auto it = queues.begin();
      std::advance(it, static_cast<long>(rng.below(queues.size())));
      auto& p = pos[it->first];
      if (p < it->second.size()) shuffled.push_back(it->second[p++]);
    }
    BarAggregator agg(spec.calendar);
    std::size_t i = 0;
    while (i < shuffled.size()) {
      const std::size_t chunk = 1 + rng.below(50);
      for (std::size_t k = 0; k < chunk && i < shuffled.size(); ++k) agg.add(shuffled[i++]);
    }
    CHECK(agg.finish() == reference);
  }
}

TEST_CASE("bar counts and volume conservation") {
  SyntheticMarketSpec spec;
  spec.calendar = one_day(5);
  spec.calendar.days.push_back(parse_date("2012-11-02"));
  spec.instruments = 3;
  const auto market = generate_market(spec);
  const auto table = aggregate(market.ticks, spec.calendar);
  REQUIRE(table.instruments.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(table.bars[k].size() == 2 * spec.calendar.periods_per_day());
    double in_session = 0, in_bars = 0;
    for (const auto& t : market.ticks)
      if (t.kind == TickKind::Trade && t.instrument == table.instruments[k] &&
          spec.calendar.period_of(t.timestamp))
        in_session += t.volume;
    for (const auto& b : table.bars[k]) in_bars += b.trade_volume;
    CHECK(in_bars == doctest::Approx(in_session).epsilon(1e-12));
  }
}
