#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mstate {

// Shortest decimal text that round-trips to the same double. Used for every
// numeric field written to CSV so artifacts are byte-stable.
std::string format_number(double value);

// Strict double parse of the whole field; nullopt on any junk.
std::optional<double> parse_number(std::string_view field);
std::optional<long long> parse_integer(std::string_view field);

// Splits one CSV line on commas. Fields are never quoted in our formats.
std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

std::string_view trim(std::string_view s);

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary sibling so a crashed run never leaves a
// half-written artifact under the final name.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace mstate
