#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace promind {

// Whole-second UTC instants and spans are used everywhere in the engine.
using Timestamp = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

/// Formats as RFC 3339 UTC, e.g. "2024-05-01T13:30:00Z".
std::string format_rfc3339(Timestamp t);

/// Accepts "YYYY-MM-DDTHH:MM:SS" followed by "Z" or a "+HH:MM"/"-HH:MM" offset.
/// Fractional seconds are truncated. Returns nullopt on malformed input.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

/// Parses "HH:MM" or "HH:MM:SS" as a time of day on `date`'s UTC calendar day.
std::optional<Timestamp> parse_time_of_day(std::string_view text, Timestamp date);

/// "HH:MM" when seconds are zero, otherwise "HH:MM:SS".
std::string format_time_of_day(Timestamp t);

/// Parses spans such as "90", "90s", "10m", "2h", "1h30m". Bare numbers are seconds.
std::optional<Duration> parse_duration(std::string_view text);

}  // namespace promind
