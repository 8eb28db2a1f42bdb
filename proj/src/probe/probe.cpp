#include "wmsmon/probe/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "wmsmon/core/url.hpp"
#include "wmsmon/model/capabilities.hpp"

namespace wmsmon {

namespace {

bool is_image_type(std::string_view content_type) {
  const auto semi = content_type.find(';');
  auto type = content_type.substr(0, semi);
  while (!type.empty() && type.front() == ' ') type.remove_prefix(1);
  return type.size() > 6 && iequals(type.substr(0, 6), "image/");
}

// Text of the first exception element, for the error detail.
std::string exception_text(std::string_view body) {
  const auto lower = to_lower(body);
  for (std::string_view tag : {"serviceexception", "exceptiontext"}) {
    for (auto at = lower.find(tag); at != std::string::npos; at = lower.find(tag, at + 1)) {
      const auto after = at + tag.size();
      if (after >= lower.size() || (lower[after] != '>' && !std::isspace(static_cast<unsigned char>(lower[after])))) {
        continue;
      }
      const auto gt = body.find('>', at);
      const auto lt = gt == std::string_view::npos ? gt : body.find('<', gt);
      if (lt == std::string_view::npos) continue;
      std::string text(body.substr(gt + 1, lt - gt - 1));
      std::replace_if(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }, ' ');
      const auto first = text.find_first_not_of(' ');
      if (first == std::string::npos) continue;
      text = text.substr(first, text.find_last_not_of(' ') - first + 1);
      if (text.size() > 200) text.resize(200);
      return text;
    }
  }
  return {};
}

std::string_view short_format(std::string_view mime) {
  if (iequals(mime, "image/png")) return "PNG";
  if (iequals(mime, "image/jpeg")) return "JPEG";
  if (iequals(mime, "image/gif")) return "GIF";
  if (iequals(mime, "image/tiff")) return "TIFF";
  if (iequals(mime, "image/svg+xml")) return "SVG";
  if (iequals(mime, "image/vnd.wap.wbmp")) return "WBMP";
  return mime;
}

std::string pick_format(const std::vector<std::string>& formats) {
  if (formats.empty()) throw ProbeError(ProbeErrc::NoUsableFormat, "capabilities list no GetMap formats");
  auto first = [&](auto pred) -> std::optional<std::string> {
    auto it = std::find_if(formats.begin(), formats.end(), pred);
    return it == formats.end() ? std::nullopt : std::optional<std::string>(*it);
  };
  auto starts = [](std::string_view prefix) {
    return [prefix](const std::string& f) { return f.size() >= prefix.size() && iequals(f.substr(0, prefix.size()), prefix); };
  };
  if (auto f = first([](const std::string& f) { return iequals(f, "image/png"); })) return *f;
  if (auto f = first(starts("image/png"))) return *f;
  if (auto f = first([](const std::string& f) { return iequals(f, "image/jpeg") || iequals(f, "image/jpg"); })) return *f;
  if (auto f = first(starts("image/"))) return *f;
  return formats.front();
}

bool is_web_mercator(std::string_view crs) {
  return iequals(crs, "EPSG:3857") || iequals(crs, "EPSG:900913") || iequals(crs, "EPSG:102100") ||
         iequals(crs, "EPSG:102113") || iequals(crs, "EPSG:3785");
}

std::array<double, 4> to_web_mercator(const GeoBBox& g) {
  static constexpr double kRadius = 6378137.0;
  static constexpr double kMaxLat = 85.05112877980659;
  auto x = [](double lon) { return kRadius * lon * std::numbers::pi / 180.0; };
  auto y = [](double lat) {
    lat = std::clamp(lat, -kMaxLat, kMaxLat) * std::numbers::pi / 180.0;
    return kRadius * std::log(std::tan(std::numbers::pi / 4 + lat / 2));
  };
  return {x(g.west), y(g.south), x(g.east), y(g.north)};
}

bool contains_crs(const std::vector<std::string>& list, std::string_view crs) {
  return std::any_of(list.begin(), list.end(), [&](const std::string& c) { return iequals(c, crs); });
}

// Query of the service URL without protocol-level pairs.
std::pair<std::string, std::vector<QueryPair>> service_base(const std::string& service_url) {
  const auto cut = service_url.find_first_of("?#");
  std::vector<QueryPair> kept;
  if (cut != std::string::npos && service_url[cut] == '?') {
    const auto hash = service_url.find('#', cut);
    for (auto& p : split_query(std::string_view(service_url).substr(cut + 1, hash == std::string::npos ? std::string::npos : hash - cut - 1))) {
      static constexpr std::string_view kProtocol[] = {
          "service", "request", "version", "wmtver", "layers", "styles", "crs", "srs", "bbox",
          "width", "height", "format", "transparent", "bgcolor", "exceptions", "time", "elevation"};
      const auto key = to_lower(percent_decode(p.key));
      if (std::find(std::begin(kProtocol), std::end(kProtocol), key) == std::end(kProtocol)) kept.push_back(std::move(p));
    }
  }
  return {service_url.substr(0, cut), std::move(kept)};
}

std::string encode_value(std::string_view v) {
  std::string out;
  for (unsigned char c : v) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~' || c == ':' || c == ',' || c == '/') {
      out += static_cast<char>(c);
    } else {
      out += fmt::format("%{:02X}", c);
    }
  }
  return out;
}

std::string format_coord(double v) {
  auto s = fmt::format("{:.8f}", v);
  s.erase(s.find_last_not_of('0') + 1);
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

}  // namespace

std::string_view to_string(Operation op) {
  return op == Operation::GetCapabilities ? "get_capabilities" : "get_map";
}

std::string_view to_string(ErrorClass e) {
  return e == ErrorClass::ServerAccessError ? "server-access-error" : "request-processing-error";
}

std::optional<Operation> operation_from_string(std::string_view s) {
  if (s == "get_capabilities") return Operation::GetCapabilities;
  if (s == "get_map") return Operation::GetMap;
  return std::nullopt;
}

std::optional<ErrorClass> error_class_from_string(std::string_view s) {
  if (s == "server-access-error") return ErrorClass::ServerAccessError;
  if (s == "request-processing-error") return ErrorClass::RequestProcessingError;
  return std::nullopt;
}

std::string_view to_string(RawOutcome o) {
  switch (o) {
    case RawOutcome::DnsFail: return "dns-fail";
    case RawOutcome::ConnectFail: return "connect-fail";
    case RawOutcome::Timeout: return "timeout";
    case RawOutcome::Non200: return "non-200";
    case RawOutcome::WrongPayload: return "200-wrong-payload";
    case RawOutcome::Ok: return "200-ok";
  }
  return "unknown";
}

bool ProbeRecord::consistent() const {
  if (success && !accessible) return false;
  if (success == error_class.has_value()) return false;
  if (error_class == ErrorClass::ServerAccessError && accessible) return false;
  if (error_class == ErrorClass::RequestProcessingError && !accessible) return false;
  if (timing && !timing->consistent()) return false;
  return response_bytes >= 0;
}

std::optional<double> download_speed(std::int64_t response_bytes, const TimingBreakdown& timing) {
  if (timing.transfer_ms <= 0) return std::nullopt;
  return static_cast<double>(response_bytes) / (static_cast<double>(timing.transfer_ms) / 1000.0);
}

void to_json(nlohmann::json& j, const ProbeRecord& r) {
  j = {{"service_id", r.service_id},
       {"site_id", r.site_id},
       {"operation", to_string(r.operation)},
       {"started_at", format_iso8601(r.started_at)},
       {"response_bytes", r.response_bytes},
       {"accessible", r.accessible},
       {"success", r.success},
       {"error_detail", r.error_detail},
       {"http_status", r.http_status}};
  if (r.timing) {
    j["timing"] = {{"dns_ms", r.timing->dns_ms},
                   {"connect_ms", r.timing->connect_ms},
                   {"request_processing_ms", r.timing->request_processing_ms},
                   {"transfer_ms", r.timing->transfer_ms},
                   {"total_ms", r.timing->total_ms}};
  } else {
    j["timing"] = nullptr;
  }
  j["download_speed_bytes_per_s"] =
      r.download_speed_bytes_per_s ? nlohmann::json(*r.download_speed_bytes_per_s) : nlohmann::json(nullptr);
  j["error_class"] = r.error_class ? nlohmann::json(to_string(*r.error_class)) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ProbeRecord& r) {
  r.service_id = j.at("service_id").get<std::string>();
  r.site_id = j.at("site_id").get<std::string>();
  const auto op = operation_from_string(j.at("operation").get<std::string>());
  if (!op) throw nlohmann::json::other_error::create(501, "unknown operation", &j);
  r.operation = *op;
  const auto& started = j.at("started_at");
  const auto t = started.is_number_integer() ? std::optional(from_epoch_ms(started.get<std::int64_t>()))
                                             : parse_iso8601(started.get<std::string>());
  if (!t) throw nlohmann::json::other_error::create(501, "bad started_at", &j);
  r.started_at = *t;
  r.timing.reset();
  if (j.contains("timing") && j["timing"].is_object()) {
    const auto& tj = j["timing"];
    TimingBreakdown t2;
    t2.dns_ms = tj.at("dns_ms").get<std::int64_t>();
    t2.connect_ms = tj.at("connect_ms").get<std::int64_t>();
    t2.request_processing_ms = tj.at("request_processing_ms").get<std::int64_t>();
    t2.transfer_ms = tj.at("transfer_ms").get<std::int64_t>();
    t2.total_ms = tj.at("total_ms").get<std::int64_t>();
    r.timing = t2;
  }
  r.response_bytes = j.value("response_bytes", std::int64_t{0});
  r.accessible = j.at("accessible").get<bool>();
  r.success = j.at("success").get<bool>();
  r.error_class.reset();
  if (j.contains("error_class") && j["error_class"].is_string()) {
    r.error_class = error_class_from_string(j["error_class"].get<std::string>());
    if (!r.error_class) throw nlohmann::json::other_error::create(501, "unknown error_class", &j);
  }
  r.error_detail = j.value("error_detail", std::string{});
  r.http_status = j.value("http_status", 0);
  r.download_speed_bytes_per_s = r.timing ? download_speed(r.response_bytes, *r.timing) : std::nullopt;
}

Classification classify_outcome(RawOutcome raw, Operation) {
  switch (raw) {
    case RawOutcome::DnsFail:
    case RawOutcome::ConnectFail:
    case RawOutcome::Timeout: return {false, false, ErrorClass::ServerAccessError};
    case RawOutcome::Non200:
    case RawOutcome::WrongPayload: return {true, false, ErrorClass::RequestProcessingError};
    case RawOutcome::Ok: return {true, true, std::nullopt};
  }
  return {false, false, ErrorClass::ServerAccessError};
}

RawOutcome raw_outcome(const HttpResponse& response, Operation op) {
  switch (response.failure) {
    case TransportFailure::DnsFailure: return RawOutcome::DnsFail;
    case TransportFailure::Timeout: return RawOutcome::Timeout;
    case TransportFailure::ConnectFailure:
    case TransportFailure::NetworkError: return RawOutcome::ConnectFail;
    case TransportFailure::None: break;
  }
  if (response.status != 200) return RawOutcome::Non200;
  if (op == Operation::GetMap) {
    return is_image_type(response.content_type) && !response.body.empty() ? RawOutcome::Ok
                                                                            : RawOutcome::WrongPayload;
  }
  try {
    parse_capabilities(response.body);
    return RawOutcome::Ok;
  } catch (const ParseError&) {
    return RawOutcome::WrongPayload;
  }
}

GetMapSpec build_getmap_spec(const CapabilitiesDoc& doc, const GetMapOptions& options) {
  const auto& layer = first_named_layer(doc);
  GetMapSpec spec;
  spec.version = doc.service_version;
  spec.layer_name = *layer.name;
  spec.width = options.width;
  spec.height = options.height;
  spec.format = pick_format(doc.supported_formats);

  const bool v130 = doc.service_version == WmsVersion::V1_3_0;
  if (contains_crs(layer.crs_list, "EPSG:4326") || layer.crs_list.empty()) {
    spec.crs = "EPSG:4326";
  } else if (v130 && contains_crs(layer.crs_list, "CRS:84")) {
    spec.crs = "CRS:84";
  } else {
    spec.crs = layer.crs_list.front();
  }

  const GeoBBox geo = layer.geographic_bbox.value_or(GeoBBox{-180, -90, 180, 90});
  if (iequals(spec.crs, "EPSG:4326")) {
    spec.bbox = v130 ? std::array{geo.south, geo.west, geo.north, geo.east}
                     : std::array{geo.west, geo.south, geo.east, geo.north};
  } else if (iequals(spec.crs, "CRS:84")) {
    spec.bbox = {geo.west, geo.south, geo.east, geo.north};
  } else {
    auto advertised = std::find_if(layer.bounding_boxes.begin(), layer.bounding_boxes.end(),
                                   [&](const CrsBBox& b) { return iequals(b.crs, spec.crs); });
    if (advertised != layer.bounding_boxes.end()) {
      spec.bbox = {advertised->minx, advertised->miny, advertised->maxx, advertised->maxy};
    } else if (is_web_mercator(spec.crs)) {
      spec.bbox = to_web_mercator(geo);
    } else {
      // No way to project without a CRS library; the server may distort or
      // reject the map, which the probe then records.
      spec.bbox = {geo.west, geo.south, geo.east, geo.north};
    }
  }
  return spec;
}

std::string getcapabilities_request_url(const std::string& service_url, std::optional<WmsVersion> version) {
  auto [base, pairs] = service_base(service_url);
  pairs.push_back({"SERVICE", "WMS", true});
  pairs.push_back({"REQUEST", "GetCapabilities", true});
  if (version) {
    pairs.push_back({"VERSION", std::string(to_string(*version)), true});
    // 1.0.0 servers read the version from WMTVER.
    if (*version == WmsVersion::V1_0_0) pairs.push_back({"WMTVER", "1.0.0", true});
  }
  return base + "?" + join_query(pairs);
}

std::string getmap_request_url(const std::string& service_url, const GetMapSpec& spec) {
  auto [base, pairs] = service_base(service_url);
  const bool v100 = spec.version == WmsVersion::V1_0_0;
  const bool v130 = spec.version == WmsVersion::V1_3_0;
  pairs.push_back({"SERVICE", "WMS", true});
  if (v100) {
    pairs.push_back({"WMTVER", "1.0.0", true});
    pairs.push_back({"REQUEST", "map", true});
  } else {
    pairs.push_back({"VERSION", std::string(to_string(spec.version)), true});
    pairs.push_back({"REQUEST", "GetMap", true});
  }
  pairs.push_back({"LAYERS", encode_value(spec.layer_name), true});
  pairs.push_back({"STYLES", "", true});
  pairs.push_back({v130 ? "CRS" : "SRS", encode_value(spec.crs), true});
  pairs.push_back({"BBOX", fmt::format("{},{},{},{}", format_coord(spec.bbox[0]), format_coord(spec.bbox[1]),
                                       format_coord(spec.bbox[2]), format_coord(spec.bbox[3])),
                   true});
  pairs.push_back({"WIDTH", std::to_string(spec.width), true});
  pairs.push_back({"HEIGHT", std::to_string(spec.height), true});
  pairs.push_back({"FORMAT", encode_value(v100 ? short_format(spec.format) : spec.format), true});
  return base + "?" + join_query(pairs);
}

bool legal_negotiation(WmsVersion requested, WmsVersion declared, std::optional<WmsVersion> server_lowest) {
  if (declared <= requested) return true;
  return server_lowest && declared == *server_lowest && requested < *server_lowest;
}

Prober::Prober(HttpTransport& transport, Clock& clock, ProberOptions options)
    : transport_(transport), clock_(clock), options_(options) {}

Timestamp Prober::next_start(const std::string& service_id, const std::string& site_id, Operation op) {
  std::lock_guard lock(mu_);
  auto now = clock_.now();
  auto [it, inserted] = last_start_.try_emplace({service_id, site_id, op}, now);
  if (!inserted) {
    if (now <= it->second) now = it->second + Millis{1};
    it->second = now;
  }
  return now;
}

Prober::Exchange Prober::exchange(const ServiceRecord& service, const std::string& site_id, Operation op,
                                  const std::string& url) {
  if (options_.limiter) options_.limiter->acquire(url_host(url));
  Exchange ex;
  auto& r = ex.record;
  r.service_id = service.id;
  r.site_id = site_id;
  r.operation = op;
  r.started_at = next_start(service.id, site_id, op);

  HttpRequest request{url};
  request.timeout = options_.timeout;
  ex.response = transport_.fetch(request);
  const auto& resp = ex.response;

  r.timing = resp.timing;
  r.http_status = resp.status;
  r.response_bytes = static_cast<std::int64_t>(resp.body.size());
  r.download_speed_bytes_per_s = download_speed(r.response_bytes, resp.timing);
  const auto raw = raw_outcome(resp, op);
  const auto c = classify_outcome(raw, op);
  r.accessible = c.accessible;
  r.success = c.success;
  r.error_class = c.error_class;
  switch (raw) {
    case RawOutcome::Ok: break;
    case RawOutcome::DnsFail:
    case RawOutcome::ConnectFail:
    case RawOutcome::Timeout:
      r.error_detail = fmt::format("{}: {}", to_string(raw), resp.error_message);
      break;
    case RawOutcome::Non200:
      r.error_detail = fmt::format("HTTP {}", resp.status);
      break;
    case RawOutcome::WrongPayload: {
      const auto text = exception_text(resp.body);
      r.error_detail = text.empty() ? fmt::format("unexpected payload ({})", resp.content_type)
                                    : fmt::format("service exception: {}", text);
      break;
    }
  }
  return ex;
}

ProbeRecord Prober::probe_getcapabilities(const ServiceRecord& service, const std::string& site_id,
                                          std::optional<CapabilitiesDoc>* document) {
  auto ex = exchange(service, site_id, Operation::GetCapabilities,
                     getcapabilities_request_url(service.canonical_url));
  if (document) {
    document->reset();
    if (ex.record.success) *document = parse_capabilities(ex.response.body);
  }
  return std::move(ex.record);
}

ProbeRecord Prober::probe_getmap(const ServiceRecord& service, const GetMapSpec& spec,
                                 const std::string& site_id) {
  return exchange(service, site_id, Operation::GetMap, getmap_request_url(service.canonical_url, spec)).record;
}

std::vector<VersionOutcome> Prober::probe_versions(const ServiceRecord& service, const std::string& site_id) {
  std::vector<VersionOutcome> out;
  for (auto v : kAllWmsVersions) {
    auto ex = exchange(service, site_id, Operation::GetCapabilities,
                       getcapabilities_request_url(service.canonical_url, v));
    VersionOutcome o;
    o.requested = v;
    if (ex.record.success) {
      o.declared = parse_capabilities(ex.response.body).service_version;
      o.supported = *o.declared == v;
    }
    o.record = std::move(ex.record);
    out.push_back(std::move(o));
  }
  std::optional<WmsVersion> lowest;
  for (const auto& o : out) {
    if (o.declared && (!lowest || *o.declared < *lowest)) lowest = o.declared;
  }
  for (auto& o : out) {
    if (o.declared) o.legal = legal_negotiation(o.requested, *o.declared, lowest);
  }
  return out;
}

std::set<WmsVersion> Prober::probe_version_support(const ServiceRecord& service, const std::string& site_id) {
  std::set<WmsVersion> out;
  for (const auto& o : probe_versions(service, site_id)) {
    if (o.supported) out.insert(o.requested);
  }
  return out;
}

}  // namespace wmsmon
