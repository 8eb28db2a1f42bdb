#include "wmsmon/analytics/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace wmsmon {

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw AnalyticsError(AnalyticsErrc::BadInput, "need at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw AnalyticsError(AnalyticsErrc::ZeroVariance, "all distances are equal");
  LinearFit f;
  f.n = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy == 0.0) {
    f.constant_response = true;
    f.r_squared = 0.0;
  } else {
    f.r_squared = (sxy * sxy) / (sxx * syy);
  }
  return f;
}

void to_json(nlohmann::json& j, const LinearFit& f) {
  j = {{"slope", f.slope},
       {"intercept", f.intercept},
       {"r_squared", f.r_squared},
       {"n", f.n},
       {"constant_response", f.constant_response}};
}

LinearFit distance_latency_regression(std::span<const SiteLatency> sites, double server_lat, double server_lon) {
  if (sites.size() < 3) throw AnalyticsError(AnalyticsErrc::TooFewSites, "need at least three sites");
  std::vector<double> d, rt;
  for (const auto& s : sites) {
    d.push_back(haversine_km(s.lat, s.lon, server_lat, server_lon));
    rt.push_back(s.rt_avg_ms);
  }
  return linear_fit(d, rt);
}

ClosestSiteReport closest_site_analysis(std::span<const ServicePoint> services, std::span<const SitePoint> sites,
                                        std::span<const ServiceSiteRt> rts) {
  std::unordered_map<std::string, const SitePoint*> site_by_id;
  for (const auto& s : sites) site_by_id.emplace(s.site_id, &s);
  std::unordered_map<std::string, std::map<std::string, double>> rt_by_service;  // site_id ordered
  for (const auto& r : rts) {
    if (site_by_id.count(r.site_id)) rt_by_service[r.service_id][r.site_id] = r.rt_avg_ms;
  }

  ClosestSiteReport report;
  for (const auto& svc : services) {
    if (!svc.location || !svc.location->valid()) {
      ++report.skipped_missing_geolocation;
      continue;
    }
    const auto it = rt_by_service.find(svc.service_id);
    if (it == rt_by_service.end() || it->second.empty()) {
      ++report.skipped_no_data;
      continue;
    }
    // Strict comparisons over site_id order keep the lowest id on ties.
    const SitePoint* fastest = nullptr;
    const SitePoint* closest = nullptr;
    double best_rt = 0.0, best_d = 0.0;
    for (const auto& [site_id, rt] : it->second) {
      const auto* site = site_by_id.at(site_id);
      const double d = haversine_km(site->lat, site->lon, svc.location->lat, svc.location->lon);
      if (!fastest || rt < best_rt) {
        fastest = site;
        best_rt = rt;
      }
      if (!closest || d < best_d) {
        closest = site;
        best_d = d;
      }
    }
    ++report.services_analyzed;
    if (fastest == closest) ++report.closest_is_fastest;
    const auto server_continent = svc.location->continent.empty() ? "Unknown" : svc.location->continent;
    const auto site_continent = fastest->continent.empty() ? "Unknown" : fastest->continent;
    ++report.continent_counts[server_continent][site_continent];
  }
  if (report.services_analyzed > 0) {
    report.fraction =
        static_cast<double>(report.closest_is_fastest) / static_cast<double>(report.services_analyzed);
  }
  for (const auto& [server, row] : report.continent_counts) {
    std::size_t total = 0;
    for (const auto& [_, n] : row) total += n;
    for (const auto& [site, n] : row) {
      report.continent_matrix[server][site] = static_cast<double>(n) / static_cast<double>(total);
    }
  }
  return report;
}

void to_json(nlohmann::json& j, const ClosestSiteReport& r) {
  j = {{"services_analyzed", r.services_analyzed},
       {"closest_is_fastest", r.closest_is_fastest},
       {"fraction", r.fraction},
       {"skipped_missing_geolocation", r.skipped_missing_geolocation},
       {"skipped_no_data", r.skipped_no_data},
       {"continent_matrix", r.continent_matrix},
       {"continent_counts", r.continent_counts}};
}

int utc_offset_from_longitude(double lon) {
  return std::clamp(static_cast<int>(std::lround(lon / 15.0)), -12, 12);
}

DiurnalSeries diurnal_series(std::span<const TimedValue> records, double server_lon, const DiurnalOptions& options) {
  DiurnalSeries s;
  s.utc_offset_hours = options.utc_offset_hours.value_or(utc_offset_from_longitude(server_lon));
  std::array<double, 24> sums{};
  for (const auto& r : records) {
    const auto local = r.at + std::chrono::hours(s.utc_offset_hours);
    const auto hour = static_cast<std::size_t>(ms_of_day(local) / 3'600'000);
    auto& h = s.hours[hour];
    h.max = h.n == 0 ? r.value : std::max(h.max, r.value);
    ++h.n;
    sums[hour] += r.value;
  }
  std::vector<double> means;
  for (std::size_t i = 0; i < 24; ++i) {
    if (s.hours[i].n == 0) continue;
    s.hours[i].mean = sums[i] / static_cast<double>(s.hours[i].n);
    means.push_back(s.hours[i].mean);
  }
  if (means.empty()) return s;
  std::sort(means.begin(), means.end());
  const auto m = means.size();
  s.median_hourly_mean = m % 2 ? means[m / 2] : (means[m / 2 - 1] + means[m / 2]) / 2.0;

  std::array<bool, 24> peak{};
  for (int i = 0; i < 24; ++i) {
    const auto& h = s.hours[static_cast<std::size_t>(i)];
    if (h.n > 0 && h.mean > options.peak_factor * s.median_hourly_mean) {
      peak[static_cast<std::size_t>(i)] = true;
      s.peak_hours.push_back(i);
    }
  }
  if (s.peak_hours.size() == 24) {
    s.peaks.push_back({0, 0});
    return s;
  }
  // Runs of consecutive peak hours, joined across midnight.
  int start = 0;
  while (peak[static_cast<std::size_t>(start)]) ++start;  // begin scanning at a non-peak hour
  for (int k = 1; k <= 24; ++k) {
    const int h = (start + k) % 24;
    if (peak[static_cast<std::size_t>(h)] && !peak[static_cast<std::size_t>((h + 23) % 24)]) {
      int e = h;
      while (peak[static_cast<std::size_t>(e)]) e = (e + 1) % 24;
      s.peaks.push_back({h, e});
    }
  }
  std::sort(s.peaks.begin(), s.peaks.end(), [](auto& a, auto& b) { return a.start_hour < b.start_hour; });
  return s;
}

void to_json(nlohmann::json& j, const DiurnalSeries& s) {
  j = {{"utc_offset_hours", s.utc_offset_hours},
       {"median_hourly_mean", s.median_hourly_mean},
       {"peak_hours", s.peak_hours},
       {"hours", nlohmann::json::array()},
       {"peaks", nlohmann::json::array()}};
  for (std::size_t i = 0; i < 24; ++i) {
    j["hours"].push_back({{"hour", i}, {"n", s.hours[i].n}, {"mean", s.hours[i].mean}, {"max", s.hours[i].max}});
  }
  for (const auto& p : s.peaks) j["peaks"].push_back({{"start_hour", p.start_hour}, {"end_hour", p.end_hour}});
}

}  // namespace wmsmon
