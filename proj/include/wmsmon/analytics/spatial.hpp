#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmsmon/analytics/error.hpp"
#include "wmsmon/core/geo.hpp"
#include "wmsmon/core/time.hpp"
#include "wmsmon/model/types.hpp"

namespace wmsmon {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
  // The response never varies, so R² is reported as 0.
  bool constant_response = false;
};

/// Ordinary least squares of y on x. Throws ZeroVariance when every x is the
/// same, BadInput on size mismatch or fewer than two points.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

void to_json(nlohmann::json& j, const LinearFit& f);

struct SiteLatency {
  std::string site_id;
  double lat = 0.0;
  double lon = 0.0;
  double rt_avg_ms = 0.0;
};

/// Average response time regressed on great-circle distance from each site
/// to the server. Throws TooFewSites below three sites.
LinearFit distance_latency_regression(std::span<const SiteLatency> sites, double server_lat, double server_lon);

struct SitePoint {
  std::string site_id;
  double lat = 0.0;
  double lon = 0.0;
  std::string continent;
};

struct ServicePoint {
  std::string service_id;
  std::optional<GeoLocation> location;
};

struct ServiceSiteRt {
  std::string service_id;
  std::string site_id;
  double rt_avg_ms = 0.0;
};

struct ClosestSiteReport {
  std::size_t services_analyzed = 0;
  std::size_t closest_is_fastest = 0;
  double fraction = 0.0;
  std::size_t skipped_missing_geolocation = 0;
  std::size_t skipped_no_data = 0;
  // [server continent][site continent]: share of that continent's services
  // whose fastest site is on the site continent. Rows sum to 1.
  std::map<std::string, std::map<std::string, double>> continent_matrix;
  std::map<std::string, std::map<std::string, std::size_t>> continent_counts;
};

/// For each service, compares the fastest site (lowest rt_avg) with the
/// nearest site among those that measured it. Ties go to the lowest site_id.
ClosestSiteReport closest_site_analysis(std::span<const ServicePoint> services, std::span<const SitePoint> sites,
                                        std::span<const ServiceSiteRt> rts);

void to_json(nlohmann::json& j, const ClosestSiteReport& r);

struct TimedValue {
  Timestamp at{};
  double value = 0.0;
};

struct DiurnalOptions {
  std::optional<int> utc_offset_hours;  // default: from the server longitude
  double peak_factor = 1.5;
};

struct HourStat {
  std::size_t n = 0;
  double mean = 0.0;
  double max = 0.0;
};

/// Local hours [start, end), wrapping past midnight when end <= start.
struct PeakWindow {
  int start_hour = 0;
  int end_hour = 0;

  friend bool operator==(const PeakWindow&, const PeakWindow&) = default;
};

struct DiurnalSeries {
  int utc_offset_hours = 0;
  std::array<HourStat, 24> hours{};
  double median_hourly_mean = 0.0;
  std::vector<int> peak_hours;
  std::vector<PeakWindow> peaks;
};

/// Offset of the nominal time zone containing `lon` (15° per hour).
int utc_offset_from_longitude(double lon);

/// Response times folded onto the server's local 24-hour day. Peak hours are
/// those whose mean exceeds `peak_factor` times the median hourly mean.
DiurnalSeries diurnal_series(std::span<const TimedValue> records, double server_lon,
                             const DiurnalOptions& options = {});

void to_json(nlohmann::json& j, const DiurnalSeries& s);

}  // namespace wmsmon
