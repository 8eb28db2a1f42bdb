#include "wmsmon/analytics/geoip.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "wmsmon/core/url.hpp"

namespace wmsmon {

std::optional<std::uint32_t> parse_ipv4(std::string_view text) {
  std::uint32_t value = 0;
  int parts = 0;
  std::size_t pos = 0;
  while (pos <= text.size() && parts < 4) {
    const auto dot = text.find('.', pos);
    const auto piece = text.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
    unsigned octet = 0;
    auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), octet);
    if (piece.empty() || ec != std::errc{} || ptr != piece.data() + piece.size() || octet > 255) {
      return std::nullopt;
    }
    value = (value << 8) | octet;
    ++parts;
    if (dot == std::string_view::npos) {
      pos = text.size() + 1;
      break;
    }
    pos = dot + 1;
  }
  if (parts != 4 || pos != text.size() + 1) return std::nullopt;
  return value;
}

namespace {

std::optional<std::uint32_t> parse_address(std::string_view text) {
  text = trim_ascii(text);
  if (text.find('.') != std::string_view::npos) return parse_ipv4(text);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || v > 0xFFFFFFFFULL) {
    return std::nullopt;
  }
  return static_cast<std::uint32_t>(v);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

GeoIpTable GeoIpTable::load_csv(std::istream& in) {
  GeoIpTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim_ascii(line);
    if (t.empty() || t.front() == '#') continue;
    const auto f = split_csv_line(line);
    auto bad = [&](const std::string& why) {
      return AnalyticsError(AnalyticsErrc::BadInput, "geoip line " + std::to_string(line_no) + ": " + why);
    };
    if (f.size() < 6) throw bad("expected 6 columns");
    const auto start = parse_address(f[0]);
    const auto end = parse_address(f[1]);
    if (!start || !end) {
      if (table.ranges_.empty() && line_no == 1) continue;  // header
      throw bad("bad address");
    }
    if (*end < *start) throw bad("range end before start");
    GeoLocation loc;
    try {
      loc.lat = std::stod(f[2]);
      loc.lon = std::stod(f[3]);
    } catch (const std::exception&) {
      throw bad("bad coordinates");
    }
    loc.country = std::string(trim_ascii(f[4]));
    loc.continent = std::string(trim_ascii(f[5]));
    if (!loc.valid()) throw bad("coordinates out of range");
    table.ranges_.push_back({*start, *end, std::move(loc)});
  }
  std::sort(table.ranges_.begin(), table.ranges_.end(), [](auto& a, auto& b) { return a.start < b.start; });
  for (std::size_t i = 1; i < table.ranges_.size(); ++i) {
    if (table.ranges_[i].start <= table.ranges_[i - 1].end) {
      throw AnalyticsError(AnalyticsErrc::BadInput, "geoip ranges overlap");
    }
  }
  return table;
}

GeoIpTable GeoIpTable::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw AnalyticsError(AnalyticsErrc::BadInput, "cannot read " + path.string());
  return load_csv(in);
}

std::optional<GeoLocation> GeoIpTable::lookup(std::uint32_t ip) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(), ip, [](std::uint32_t v, const Range& r) { return v < r.start; });
  if (it == ranges_.begin()) return std::nullopt;
  --it;
  if (ip > it->end) return std::nullopt;
  return it->location;
}

std::optional<GeoLocation> GeoIpTable::lookup(std::string_view ip) const {
  const auto v = parse_ipv4(ip);
  return v ? lookup(*v) : std::nullopt;
}

std::optional<std::string> resolve_ipv4(const std::string& host) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &result) != 0 || !result) return std::nullopt;
  char buf[INET_ADDRSTRLEN] = {};
  const auto* addr = reinterpret_cast<const sockaddr_in*>(result->ai_addr);
  const bool ok = inet_ntop(AF_INET, &addr->sin_addr, buf, sizeof buf) != nullptr;
  freeaddrinfo(result);
  return ok ? std::optional<std::string>(buf) : std::nullopt;
}

}  // namespace wmsmon
