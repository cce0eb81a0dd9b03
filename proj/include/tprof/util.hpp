#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tprof::util {

// Strict full-token numeric parses; no leading/trailing junk accepted.
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int64(std::string_view s);

// true/false/1/0/yes/no/on/off, case-insensitive.
std::optional<bool> parse_bool(std::string_view s);

std::string_view trim(std::string_view s);

// Splits on commas without allocation; empty fields are preserved.
void split_csv(std::string_view line, std::vector<std::string_view>& out);

// Convenience copying form for cold paths.
std::vector<std::string> split_csv(std::string_view line);

// Shortest round-trip decimal form (std::to_chars).
std::string format_double(double v);

// UTC day-of-week, 0 = Sunday.
int utc_day_of_week(std::int64_t unix_ms);

}  // namespace tprof::util
