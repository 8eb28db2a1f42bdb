#pragma once

#include <set>
#include <string_view>
#include <vector>

#include "wmsmon/core/error.hpp"
#include "wmsmon/model/types.hpp"

namespace wmsmon {

enum class TimeErrc { Unparseable };
using TimeError = Error<TimeErrc>;

/// Parses a WMS time dimension value: comma-separated items, each a single
/// date, `start/end`, or `start/end/period`. Dates may be year-only, year-month
/// or full (time-of-day is ignored). Items that do not parse are skipped;
/// throws TimeError only when nothing parses.
std::vector<TimeExtent> parse_time_dimension(std::string_view text);

/// ISO-8601 duration ("P1Y2M3DT4H5M6S"). Returns nullopt if malformed.
std::optional<IsoDuration> parse_iso_duration(std::string_view text);

/// Years in [1900, 2099] the layer's data refers to: every year covered by
/// its time dimension plus standalone 4-digit years in its name and title.
std::set<int> extract_layer_years(const LayerRecord& layer);

}  // namespace wmsmon
