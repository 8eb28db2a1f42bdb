#include "wmsmon/analytics/survey.hpp"

#include <algorithm>
#include <charconv>

#include "wmsmon/core/url.hpp"
#include "wmsmon/model/capabilities.hpp"
#include "wmsmon/model/time_dimension.hpp"

namespace wmsmon {

std::vector<LayerRecord> flatten_layers(const CapabilitiesDoc& doc) {
  std::vector<LayerRecord> out;
  for_each_layer(doc, [&](const LayerRecord& layer, std::size_t) {
    LayerRecord copy = layer;
    copy.children.clear();
    out.push_back(std::move(copy));
  });
  return out;
}

double YearlyDistribution::share_latest_before(int year) const {
  if (dated_services == 0) return 0.0;
  std::size_t before = 0;
  for (const auto& [y, n] : services_with_latest) {
    if (y < year) before += n;
  }
  return static_cast<double>(before) / static_cast<double>(dated_services);
}

YearlyDistribution yearly_distribution(std::span<const ServiceLayers> services) {
  YearlyDistribution d;
  for (const auto& s : services) {
    std::optional<int> latest;
    for (const auto& layer : s.layers) {
      const auto years = extract_layer_years(layer);
      for (int y : years) ++d.layer_count[y];
      if (!years.empty()) latest = std::max(latest.value_or(*years.rbegin()), *years.rbegin());
    }
    if (latest) {
      ++d.services_with_latest[*latest];
      ++d.dated_services;
    }
  }
  return d;
}

void to_json(nlohmann::json& j, const YearlyDistribution& d) {
  j = nlohmann::json::object();
  j["dated_services"] = d.dated_services;
  auto& years = j["years"] = nlohmann::json::array();
  std::set<int> all;
  for (const auto& [y, _] : d.layer_count) all.insert(y);
  for (const auto& [y, _] : d.services_with_latest) all.insert(y);
  for (int y : all) {
    const auto lc = d.layer_count.find(y);
    const auto sl = d.services_with_latest.find(y);
    years.push_back({{"year", y},
                     {"layer_count", lc == d.layer_count.end() ? 0 : lc->second},
                     {"services_with_latest", sl == d.services_with_latest.end() ? 0 : sl->second}});
  }
}

std::string normalize_crs(std::string_view crs) {
  std::string s = to_upper(trim_ascii(crs));
  // urn:ogc:def:crs:EPSG:6.6:4326, urn:ogc:def:crs:EPSG::4326
  if (s.starts_with("URN:OGC:DEF:CRS:")) {
    const auto rest = s.substr(16);
    const auto colon = rest.find(':');
    const auto authority = rest.substr(0, colon);
    const auto code = rest.substr(rest.rfind(':') + 1);
    if (authority == "OGC" && code == "CRS84") return "CRS:84";
    return authority + ":" + code;
  }
  // http://www.opengis.net/gml/srs/epsg.xml#4326, http://www.opengis.net/def/crs/EPSG/0/4326
  if (s.starts_with("HTTP://") || s.starts_with("HTTPS://")) {
    if (const auto hash = s.rfind('#'); hash != std::string::npos && s.find("EPSG") != std::string::npos) {
      return "EPSG:" + s.substr(hash + 1);
    }
    if (const auto p = s.find("/DEF/CRS/"); p != std::string::npos) {
      const auto rest = s.substr(p + 9);
      const auto authority = rest.substr(0, rest.find('/'));
      const auto code = rest.substr(rest.rfind('/') + 1);
      if (authority == "OGC" && code == "CRS84") return "CRS:84";
      return authority + ":" + code;
    }
  }
  return s;
}

namespace {

std::optional<int> epsg_code(std::string_view crs) {
  const auto n = normalize_crs(crs);
  if (!n.starts_with("EPSG:")) return std::nullopt;
  int code = 0;
  const auto* first = n.data() + 5;
  const auto* last = n.data() + n.size();
  auto [ptr, ec] = std::from_chars(first, last, code);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return code;
}

bool in(int code, int lo, int hi) { return code >= lo && code <= hi; }

}  // namespace

std::string_view to_string(Projection p) {
  switch (p) {
    case Projection::WebMercator: return "web-mercator";
    case Projection::UniversalTransverseMercator: return "universal-transverse-mercator";
    case Projection::AntarcticStereographic: return "antarctic-stereographic";
    case Projection::Albers: return "albers";
    case Projection::Other: return "other";
  }
  return "other";
}

Projection projection_of(std::string_view crs) {
  const auto code = epsg_code(crs);
  if (!code) return Projection::Other;
  const int c = *code;
  if (c == 3857 || c == 900913 || c == 102100 || c == 102113 || c == 3785) return Projection::WebMercator;
  if (in(c, 32601, 32660) || in(c, 32701, 32760) || in(c, 26901, 26923) || in(c, 26701, 26722) ||
      in(c, 25828, 25838) || in(c, 28348, 28358) || in(c, 2955, 2962) || in(c, 31965, 31985) ||
      in(c, 3040, 3051) || in(c, 23028, 23038)) {
    return Projection::UniversalTransverseMercator;
  }
  if (c == 3031 || c == 3976 || c == 3412) return Projection::AntarcticStereographic;
  if (c == 3005 || c == 102003 || c == 102008 || c == 5070 || c == 3577 || c == 3338 || c == 3310 ||
      c == 3083 || c == 6350 || c == 102039 || c == 3174) {
    return Projection::Albers;
  }
  return Projection::Other;
}

bool is_ellipsoidal_crs(std::string_view crs) {
  const auto n = normalize_crs(crs);
  if (n == "CRS:84" || n == "CRS:83" || n == "CRS:27") return true;
  const auto code = epsg_code(n);
  return code && in(*code, 4001, 4999);
}

CrsTally crs_tally(std::span<const LayerRecord> layers) {
  CrsTally t;
  std::map<Projection, std::size_t> per_projection;
  std::map<Projection, std::map<std::string, std::size_t>> codes;
  for (const auto& layer : layers) {
    if (layer.crs_list.empty()) continue;
    ++t.layers_with_crs;
    bool ellipsoidal = false;
    std::set<Projection> families;
    for (const auto& crs : layer.crs_list) {
      ellipsoidal = ellipsoidal || is_ellipsoidal_crs(crs);
      const auto p = projection_of(crs);
      if (p == Projection::Other) continue;
      families.insert(p);
      ++codes[p][normalize_crs(crs)];
    }
    if (ellipsoidal) ++t.ellipsoidal_layers;
    for (auto p : families) ++per_projection[p];
  }
  const auto denom = static_cast<double>(std::max<std::size_t>(t.layers_with_crs, 1));
  t.ellipsoidal_share = static_cast<double>(t.ellipsoidal_layers) / denom;
  for (const auto& [p, n] : per_projection) {
    ProjectionShare s{p, n, static_cast<double>(n) / denom, {}};
    std::vector<std::pair<std::string, std::size_t>> by_freq(codes[p].begin(), codes[p].end());
    std::stable_sort(by_freq.begin(), by_freq.end(), [](auto& a, auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; i < by_freq.size() && i < 3; ++i) s.sample_codes.push_back(by_freq[i].first);
    t.projections.push_back(std::move(s));
  }
  std::stable_sort(t.projections.begin(), t.projections.end(),
                   [](const auto& a, const auto& b) { return a.layers > b.layers; });
  return t;
}

void to_json(nlohmann::json& j, const CrsTally& t) {
  j = {{"layers_with_crs", t.layers_with_crs},
       {"ellipsoidal_layers", t.ellipsoidal_layers},
       {"ellipsoidal_share", t.ellipsoidal_share},
       {"projections", nlohmann::json::array()}};
  for (const auto& p : t.projections) {
    j["projections"].push_back({{"projection", to_string(p.projection)},
                                {"layers", p.layers},
                                {"share", p.share},
                                {"sample_codes", p.sample_codes}});
  }
}

VersionTally version_tally(std::span<const std::set<WmsVersion>> supported_per_service) {
  VersionTally t;
  for (auto v : kAllWmsVersions) t.supporting[v] = 0;
  for (const auto& versions : supported_per_service) {
    ++t.services;
    for (auto v : versions) ++t.supporting[v];
  }
  return t;
}

void to_json(nlohmann::json& j, const VersionTally& t) {
  j = {{"services", t.services}, {"supporting", nlohmann::json::object()}};
  for (const auto& [v, n] : t.supporting) j["supporting"][std::string(to_string(v))] = n;
}

ProviderType classify_provider_type(std::string_view organization, std::string_view url) {
  const auto org = " " + to_lower(std::string(organization)) + " ";
  std::string host;
  if (!url.empty()) {
    try {
      host = to_lower(url_host(url));
    } catch (const std::exception&) {
    }
  }
  auto has = [&](std::initializer_list<std::string_view> words) {
    return std::any_of(words.begin(), words.end(), [&](std::string_view w) { return org.find(w) != std::string::npos; });
  };
  auto host_has = [&](std::initializer_list<std::string_view> parts) {
    return std::any_of(parts.begin(), parts.end(), [&](std::string_view p) {
      return host.ends_with(p) || host.find(std::string(p) + ".") != std::string::npos;
    });
  };
  // Intergovernmental bodies first: their names also contain "organization"
  // or "agency".
  if (has({"united nations", " un ", "unep", "fao ", " fao", "unesco", "world bank", "european commission",
           "european environment agency", "joint research centre", "oecd", "intergovernmental", "world meteorological",
           "group on earth observations", "european union", "eumetsat", "esa "})) {
    return ProviderType::Intergovernmental;
  }
  if (has({"universit", "college", "school of", "academy of sciences", "polytechnic", "institute of technology",
           "hochschule", "universidad", "universidade", "université", "research center", "research centre"}) ||
      host_has({".edu", ".ac"})) {
    return ProviderType::Academic;
  }
  if (has({"ministry", "department", "government", "agency", "geological survey", "national ", "federal",
           "state of", "county", "city of", "municipal", "council", "bureau", "administration", "commission",
           "authority", "office of", "bundesamt", "landesamt", "instituto nacional", "service of"}) ||
      host_has({".gov", ".mil", ".gouv", ".gob", ".govt"})) {
    return ProviderType::Government;
  }
  if (has({"foundation", "association", "society", "non-profit", "nonprofit", "trust", "conservancy",
           "ngo ", "alliance", "network of"})) {
    return ProviderType::Nonprofit;
  }
  if (has({" inc", " ltd", " llc", " gmbh", " corp", " company", " co.", " s.a.", " srl", " plc", " ag ",
           " bv", "consulting", "solutions", "technologies"}) ||
      host_has({".com", ".biz"})) {
    return ProviderType::Industry;
  }
  if (host_has({".org"})) return ProviderType::Nonprofit;
  return ProviderType::Unknown;
}

std::map<std::string, std::size_t> services_per_provider(std::span<const ServiceRecord> services) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : services) {
    if (!s.provider_name) continue;
    auto name = to_lower(trim_ascii(*s.provider_name));
    if (!name.empty()) ++counts[name];
  }
  return counts;
}

}  // namespace wmsmon
