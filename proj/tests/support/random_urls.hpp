#pragma once

#include <random>
#include <string>
#include <vector>

namespace wmsmon::testing {

/// Random absolute http(s) URLs with messy queries: mixed-case WMS keys,
/// wrong values, duplicates, valueless keys and escapes.
inline std::string random_prefix(std::mt19937_64& rng) {
  auto pick = [&rng](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  auto coin = [&rng](double p) { return std::bernoulli_distribution(p)(rng); };

  std::string url = pick({"http", "https", "HTTP"}) + "://" +
                    pick({"h", "maps.example.org", "GIS.Example.COM", "10.0.0.7", "a-b.c"});
  if (coin(0.3)) url += ":" + pick({"80", "443", "8080", "6080"});
  const int segments = std::uniform_int_distribution<int>(0, 4)(rng);
  for (int i = 0; i < segments; ++i) {
    url += "/" + pick({"wms", "ows", "geoserver", "arcgis", "services", "MapServer", "WMSServer", "cgi-bin",
                       "mapserv", "a%20b", "x.map"});
  }
  if (segments == 0 && coin(0.5)) url += "/";
  const int pairs = std::uniform_int_distribution<int>(0, 6)(rng);
  if (pairs > 0 || coin(0.2)) url += "?";
  for (int i = 0; i < pairs; ++i) {
    if (i > 0) url += coin(0.1) ? "&&" : "&";
    url += pick({"service", "SERVICE", "Service", "request", "REQUEST", "version", "map", "layers", "x",
                 "foo", "f", "%73ervice"});
    if (coin(0.9)) {
      url += "=" + pick({"WMS", "wms", "WFS", "GetCapabilities", "getcapabilities", "GetMap", "1.3.0",
                         "/maps/a.map", "", "a%2Fb", "x+y"});
    }
  }
  if (coin(0.2)) url += "#" + pick({"top", "frag"});
  return url;
}

}  // namespace wmsmon::testing
