#pragma once

// Logs and layer sets built so that their aggregate statistics equal known
// published proportions. Counts are chosen as the nearest integers to the
// proportions over the stated population sizes.

#include <map>
#include <string>
#include <vector>

#include "wmsmon/analytics/spatial.hpp"
#include "wmsmon/analytics/survey.hpp"
#include "wmsmon/probe/probe.hpp"

namespace wmsmon::testing {

inline ProbeRecord probe_record(std::string service, bool accessible, bool success, std::int64_t at_ms,
                                Operation op = Operation::GetCapabilities) {
  ProbeRecord r;
  r.service_id = std::move(service);
  r.site_id = "site-a";
  r.operation = op;
  r.started_at = from_epoch_ms(at_ms);
  r.accessible = accessible;
  r.success = success;
  if (!success) {
    r.error_class = accessible ? ErrorClass::RequestProcessingError : ErrorClass::ServerAccessError;
  }
  return r;
}

/// 1210 services probed six times each: 334 never accessible, 165
/// sometimes, 711 always (27.60% / 13.64% / 58.76%).
inline std::map<std::string, std::vector<ProbeRecord>> accessibility_fixture() {
  std::map<std::string, std::vector<ProbeRecord>> logs;
  auto add = [&](int first, int count, auto pattern) {
    for (int i = first; i < first + count; ++i) {
      const auto id = "svc-" + std::to_string(i);
      for (int k = 0; k < 6; ++k) logs[id].push_back(probe_record(id, pattern(i, k), pattern(i, k), k * 300'000));
    }
  };
  add(0, 334, [](int, int) { return false; });
  add(334, 165, [](int i, int k) { return (i + k) % 3 != 0; });
  add(499, 711, [](int, int) { return true; });
  return logs;
}

/// 10000 failed probes, 6164 request-processing and 3836 server-access
/// errors (61.64% / 38.36%), interleaved with 2500 successes.
inline std::vector<ProbeRecord> error_type_fixture() {
  std::vector<ProbeRecord> log;
  for (int i = 0; i < 12500; ++i) {
    const int k = i % 5;
    if (k == 4) {
      log.push_back(probe_record("svc", true, true, i));
    } else {
      const int failure_index = i - i / 5;  // 0..9999 across failures
      log.push_back(probe_record("svc", failure_index >= 3836, false, i));
    }
  }
  return log;
}

/// 4587 services whose newest dated layer falls in a known year; 4124 of
/// them before 2013 (89.91%).
inline std::vector<ServiceLayers> yearly_fixture() {
  std::vector<ServiceLayers> services;
  for (int i = 0; i < 4587; ++i) {
    ServiceLayers s;
    s.service_id = "svc-" + std::to_string(i);
    const int latest = i < 4124 ? 1995 + i % 18 : 2013 + i % 3;  // 1995..2012 or 2013..2015
    LayerRecord old_layer;
    old_layer.title = "Land use " + std::to_string(latest - 5);
    LayerRecord newest;
    newest.title = "Land use " + std::to_string(latest);
    LayerRecord undated;
    undated.title = "Roads";
    s.layers = {old_layer, newest, undated};
    services.push_back(std::move(s));
  }
  return services;
}

struct ContinentWorld {
  std::vector<ServicePoint> services;
  std::vector<SitePoint> sites;
  std::vector<ServiceSiteRt> rts;
};

/// Servers on five continents whose fastest monitoring continent follows
/// fixed counts: per server continent, how many services are fastest from a
/// North American, European, Asian and South American site. The counts are
/// the nearest integers to the published shares over 526/306/4/15/25
/// services.
inline ContinentWorld continent_fixture() {
  ContinentWorld w;
  w.sites = {{"site-na", 39.0, -77.5, "North America"},
             {"site-eu", 53.3, -6.3, "Europe"},
             {"site-as", 1.35, 103.8, "Asia"},
             {"site-sa", -23.5, -46.6, "South America"}};
  struct Row {
    std::string continent;
    double lat, lon;
    int na, eu, as, sa;
  };
  const std::vector<Row> rows{{"North America", 40.7, -74.0, 480, 16, 20, 10},
                              {"Europe", 48.8, 2.35, 11, 291, 2, 2},
                              {"Asia", 35.7, 139.7, 0, 0, 4, 0},
                              {"South America", -34.6, -58.4, 9, 0, 1, 5},
                              {"Oceania", -33.9, 151.2, 1, 0, 24, 0}};
  int n = 0;
  for (const auto& row : rows) {
    const int counts[] = {row.na, row.eu, row.as, row.sa};
    for (int site = 0; site < 4; ++site) {
      for (int k = 0; k < counts[site]; ++k) {
        const auto id = "svc-" + std::to_string(n++);
        w.services.push_back({id, GeoLocation{row.lat, row.lon, "", row.continent}});
        for (int s = 0; s < 4; ++s) w.rts.push_back({id, w.sites[s].site_id, s == site ? 100.0 : 400.0 + s});
      }
    }
  }
  return w;
}

}  // namespace wmsmon::testing
