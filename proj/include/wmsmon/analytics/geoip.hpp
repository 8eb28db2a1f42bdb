#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wmsmon/analytics/error.hpp"
#include "wmsmon/model/types.hpp"

namespace wmsmon {

/// "a.b.c.d" to a host-order integer.
std::optional<std::uint32_t> parse_ipv4(std::string_view text);

/// IPv4 range table from a CSV snapshot with columns
/// ip_start,ip_end,lat,lon,country,continent. Addresses are dotted quads or
/// integers; a header line is skipped; '#' lines are comments.
class GeoIpTable {
 public:
  static GeoIpTable load_csv(std::istream& in);
  static GeoIpTable load_csv(const std::filesystem::path& path);

  std::optional<GeoLocation> lookup(std::uint32_t ip) const;
  std::optional<GeoLocation> lookup(std::string_view ip) const;
  std::size_t size() const { return ranges_.size(); }

 private:
  struct Range {
    std::uint32_t start;
    std::uint32_t end;
    GeoLocation location;
  };
  std::vector<Range> ranges_;  // sorted by start, non-overlapping
};

/// First IPv4 address of `host` via the system resolver.
std::optional<std::string> resolve_ipv4(const std::string& host);

}  // namespace wmsmon
