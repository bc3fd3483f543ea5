#include "mstate/timeutil.hpp"

#include <cstdio>

#include "mstate/errors.hpp"

namespace mstate {

namespace {

using namespace std::chrono;

int read_digits(std::string_view text, std::size_t pos, std::size_t count,
                std::string_view what) {
  if (pos + count > text.size())
    throw FormatError("truncated " + std::string(what) + " in '" +
                      std::string(text) + "'");
  int value = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9')
      throw FormatError("non-digit in " + std::string(what) + " of '" +
                        std::string(text) + "'");
    value = value * 10 + (c - '0');
  }
  return value;
}

void expect_char(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c)
    throw FormatError("expected '" + std::string(1, c) + "' at offset " +
                      std::to_string(pos) + " in '" + std::string(text) + "'");
}

sys_days make_date(int y, int m, int d, std::string_view text) {
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw FormatError("invalid date in '" + std::string(text) + "'");
  return sys_days{ymd};
}

}  // namespace

sys_days parse_date(std::string_view text) {
  const int y = read_digits(text, 0, 4, "year");
  expect_char(text, 4, '-');
  const int m = read_digits(text, 5, 2, "month");
  expect_char(text, 7, '-');
  const int d = read_digits(text, 8, 2, "day");
  if (text.size() != 10)
    throw FormatError("trailing characters in date '" + std::string(text) + "'");
  return make_date(y, m, d, text);
}

std::string format_date(sys_days day) {
  const year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

UtcOffset parse_utc_offset(std::string_view text) {
  if (text == "Z" || text == "z") return UtcOffset{0};
  if (text.size() != 6 || (text[0] != '+' && text[0] != '-') || text[3] != ':')
    throw FormatError("invalid UTC offset '" + std::string(text) + "'");
  const int h = read_digits(text, 1, 2, "offset hours");
  const int m = read_digits(text, 4, 2, "offset minutes");
  if (h > 23 || m > 59)
    throw FormatError("invalid UTC offset '" + std::string(text) + "'");
  const int total = h * 60 + m;
  return UtcOffset{text[0] == '-' ? -total : total};
}

minutes parse_clock_time(std::string_view text) {
  if (text.size() != 5) throw FormatError("invalid time '" + std::string(text) + "'");
  const int h = read_digits(text, 0, 2, "hours");
  expect_char(text, 2, ':');
  const int m = read_digits(text, 3, 2, "minutes");
  if (h > 24 || m > 59 || (h == 24 && m != 0))
    throw FormatError("invalid time '" + std::string(text) + "'");
  return minutes{h * 60 + m};
}

Timestamp parse_iso8601(std::string_view text) {
  const int y = read_digits(text, 0, 4, "year");
  expect_char(text, 4, '-');
  const int mo = read_digits(text, 5, 2, "month");
  expect_char(text, 7, '-');
  const int d = read_digits(text, 8, 2, "day");
  if (text.size() <= 10 || (text[10] != 'T' && text[10] != ' '))
    throw FormatError("missing time part in '" + std::string(text) + "'");
  const int h = read_digits(text, 11, 2, "hour");
  expect_char(text, 13, ':');
  const int mi = read_digits(text, 14, 2, "minute");
  expect_char(text, 16, ':');
  const int s = read_digits(text, 17, 2, "second");
  if (h > 23 || mi > 59 || s > 60)
    throw FormatError("invalid time of day in '" + std::string(text) + "'");

  std::size_t pos = 19;
  std::int64_t frac_ns = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 9) {
        frac_ns = frac_ns * 10 + (text[pos] - '0');
        ++digits;
      }
      ++pos;
    }
    if (digits == 0)
      throw FormatError("empty fraction in '" + std::string(text) + "'");
    for (; digits < 9; ++digits) frac_ns *= 10;
  }
  if (pos >= text.size())
    throw FormatError("timestamp '" + std::string(text) + "' has no timezone");
  const UtcOffset offset = parse_utc_offset(text.substr(pos));

  const sys_days date = make_date(y, mo, d, text);
  const auto local = date + hours{h} + minutes{mi} + seconds{s};
  return Timestamp{local.time_since_epoch() - offset + nanoseconds{frac_ns}};
}

std::string format_iso8601(Timestamp t, UtcOffset offset) {
  const auto local = t + offset;
  const auto day = floor<days>(local);
  const year_month_day ymd{day};
  const hh_mm_ss tod{local - day};
  char buf[64];
  int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d",
                        static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()),
                        static_cast<unsigned>(ymd.day()),
                        static_cast<int>(tod.hours().count()),
                        static_cast<int>(tod.minutes().count()),
                        static_cast<int>(tod.seconds().count()));
  const auto frac = tod.subseconds().count();
  if (frac != 0)
    n += std::snprintf(buf + n, sizeof buf - n, ".%09lld",
                       static_cast<long long>(frac));
  const auto off = offset.count();
  if (off == 0) {
    std::snprintf(buf + n, sizeof buf - n, "Z");
  } else {
    const auto a = off < 0 ? -off : off;
    std::snprintf(buf + n, sizeof buf - n, "%c%02d:%02d", off < 0 ? '-' : '+',
                  static_cast<int>(a / 60), static_cast<int>(a % 60));
  }
  return buf;
}

LocalTime to_local(Timestamp t, UtcOffset offset) {
  const auto local = t + offset;
  const auto day = floor<days>(local);
  return {sys_days{day.time_since_epoch()}, local - day};
}

}  // namespace mstate
