#pragma once

// Small text helpers shared by the dataset, MPS and result writers.

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hubopt
{

using Timestamp = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

/// Parses `YYYY-MM-DDTHH:MM[:SS]` (a space is accepted in place of `T`).
std::optional<Timestamp> parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

/// Parses durations such as `1h`, `364D`, `30m`, `2W`, `0h`, `45s`.
std::optional<Duration> parse_duration(std::string_view text);
std::string format_duration(Duration d);

std::optional<double> parse_number(std::string_view text);

/// Shortest representation that parses back to the same double; `-0` prints as `0`.
std::string format_number(double value);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

/// One CSV record split into fields (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> parse_csv_line(std::string_view line);
std::string csv_escape(std::string_view field);

} // namespace hubopt
