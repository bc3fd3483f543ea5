#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace mstate {

// UTC instant with nanosecond resolution.
using Timestamp = std::chrono::sys_time<std::chrono::nanoseconds>;

// Offset of the exchange's local clock from UTC.
using UtcOffset = std::chrono::minutes;

// Parses ISO-8601 `YYYY-MM-DDTHH:MM:SS[.fffffffff](Z|+HH:MM|-HH:MM)`.
// A space is accepted in place of `T`. Throws FormatError.
Timestamp parse_iso8601(std::string_view text);

// Formats with the given offset, e.g. `2012-11-01T09:15:00+02:00`. Fractional
// seconds are printed only when non-zero.
std::string format_iso8601(Timestamp t, UtcOffset offset);

// Parses `+HH:MM`, `-HH:MM` or `Z`.
UtcOffset parse_utc_offset(std::string_view text);

// Parses `HH:MM` into minutes after midnight.
std::chrono::minutes parse_clock_time(std::string_view text);

// Parses `YYYY-MM-DD`.
std::chrono::sys_days parse_date(std::string_view text);
std::string format_date(std::chrono::sys_days day);

// Local calendar date and minute-of-day of an instant.
struct LocalTime {
  std::chrono::sys_days date;
  std::chrono::nanoseconds since_midnight;
};
LocalTime to_local(Timestamp t, UtcOffset offset);

}  // namespace mstate
