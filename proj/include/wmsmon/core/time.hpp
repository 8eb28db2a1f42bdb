#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace wmsmon {

using Millis = std::chrono::milliseconds;
using Timestamp = std::chrono::sys_time<Millis>;

inline std::int64_t to_epoch_ms(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_epoch_ms(std::int64_t ms) { return Timestamp{Millis{ms}}; }

/// "2015-08-23T00:05:00.000Z"
std::string format_iso8601(Timestamp t);

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDThh:mm[:ss[.fff]]" with optional "Z" or
/// "+hh:mm" offset. Returns nullopt on anything else.
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// ISO-8601 or a bare integer of epoch milliseconds.
std::optional<Timestamp> parse_time_param(std::string_view text);

/// Milliseconds since the most recent UTC midnight.
std::int64_t ms_of_day(Timestamp t);

Timestamp floor_to_utc_day(Timestamp t);

}  // namespace wmsmon
