#include "wmsmon/model/json_io.hpp"

#include <stdexcept>

namespace wmsmon {

using nlohmann::json;

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

template <typename E>
E enum_from(const json& j, const char* key, std::optional<E> (*parse)(std::string_view), E fallback) {
  if (!j.contains(key)) return fallback;
  const auto s = j.at(key).get<std::string>();
  auto v = parse(s);
  if (!v) throw std::invalid_argument(std::string("bad value for ") + key + ": " + s);
  return *v;
}

}  // namespace

json timestamp_json(Timestamp t) { return format_iso8601(t); }

Timestamp timestamp_from_json(const json& j) {
  if (j.is_number_integer()) return from_epoch_ms(j.get<std::int64_t>());
  const auto s = j.get<std::string>();
  auto t = parse_iso8601(s);
  if (!t) throw std::invalid_argument("bad timestamp: " + s);
  return *t;
}

void to_json(json& j, const GeoLocation& v) {
  j = json{{"lat", v.lat}, {"lon", v.lon}, {"country", v.country}, {"continent", v.continent}};
}

void from_json(const json& j, GeoLocation& v) {
  v.lat = j.at("lat").get<double>();
  v.lon = j.at("lon").get<double>();
  v.country = j.value("country", "");
  v.continent = j.value("continent", "");
}

void to_json(json& j, const ServiceRecord& v) {
  j = json{{"id", v.id},
           {"canonical_url", v.canonical_url},
           {"discovered_from", to_string(v.discovered_from)},
           {"first_seen", timestamp_json(v.first_seen)},
           {"last_seen", timestamp_json(v.last_seen)},
           {"provider_type", to_string(v.provider_type)},
           {"publisher_software", to_string(v.publisher_software)},
           {"liveness", to_string(v.liveness)}};
  put_optional(j, "server_location", v.server_location);
  put_optional(j, "provider_name", v.provider_name);
}

void from_json(const json& j, ServiceRecord& v) {
  v.id = j.at("id").get<std::string>();
  v.canonical_url = j.at("canonical_url").get<std::string>();
  v.discovered_from = enum_from(j, "discovered_from", provenance_from_string, Provenance::Manual);
  if (j.contains("first_seen")) v.first_seen = timestamp_from_json(j.at("first_seen"));
  if (j.contains("last_seen")) v.last_seen = timestamp_from_json(j.at("last_seen"));
  v.server_location = get_optional<GeoLocation>(j, "server_location");
  v.provider_name = get_optional<std::string>(j, "provider_name");
  v.provider_type = enum_from(j, "provider_type", provider_type_from_string, ProviderType::Unknown);
  v.publisher_software = enum_from(j, "publisher_software", publisher_software_from_string,
                                   PublisherSoftware::Unknown);
  v.liveness = enum_from(j, "liveness", liveness_from_string, Liveness::Unknown);
}

void to_json(json& j, const GeoBBox& v) {
  j = json{{"west", v.west}, {"south", v.south}, {"east", v.east}, {"north", v.north}};
}

void from_json(const json& j, GeoBBox& v) {
  v.west = j.at("west").get<double>();
  v.south = j.at("south").get<double>();
  v.east = j.at("east").get<double>();
  v.north = j.at("north").get<double>();
}

void to_json(json& j, const CrsBBox& v) {
  j = json{{"crs", v.crs}, {"minx", v.minx}, {"miny", v.miny}, {"maxx", v.maxx}, {"maxy", v.maxy}};
}

void from_json(const json& j, CrsBBox& v) {
  v.crs = j.at("crs").get<std::string>();
  v.minx = j.at("minx").get<double>();
  v.miny = j.at("miny").get<double>();
  v.maxx = j.at("maxx").get<double>();
  v.maxy = j.at("maxy").get<double>();
}

void to_json(json& j, const LayerRecord& v) {
  j = json{{"title", v.title},
           {"abstract", v.abstract_text},
           {"keywords", v.keywords},
           {"crs_list", v.crs_list},
           {"bounding_boxes", v.bounding_boxes},
           {"children", v.children},
           {"is_cascading_parent", v.is_cascading_parent()}};
  put_optional(j, "name", v.name);
  put_optional(j, "geographic_bbox", v.geographic_bbox);
  put_optional(j, "time_dimension", v.time_dimension);
}

void from_json(const json& j, LayerRecord& v) {
  v.name = get_optional<std::string>(j, "name");
  v.title = j.value("title", "");
  v.abstract_text = j.value("abstract", "");
  v.keywords = j.value("keywords", std::vector<std::string>{});
  v.geographic_bbox = get_optional<GeoBBox>(j, "geographic_bbox");
  v.crs_list = j.value("crs_list", std::vector<std::string>{});
  v.bounding_boxes = j.value("bounding_boxes", std::vector<CrsBBox>{});
  v.time_dimension = get_optional<std::string>(j, "time_dimension");
  v.children = j.value("children", std::vector<LayerRecord>{});
}

void to_json(json& j, const CapabilitiesDoc& v) {
  j = json{{"service_version", to_string(v.service_version)},
           {"root_element", v.root_element},
           {"title", v.title},
           {"abstract", v.abstract_text},
           {"keywords", v.keywords},
           {"supported_formats", v.supported_formats},
           {"root_layers", v.root_layers},
           {"raw_size_bytes", v.raw_size_bytes},
           {"declared_software", to_string(v.declared_software)}};
  put_optional(j, "contact_organization", v.contact_organization);
  put_optional(j, "online_resource", v.online_resource);
}

void from_json(const json& j, CapabilitiesDoc& v) {
  v.service_version =
      enum_from(j, "service_version", wms_version_from_string, WmsVersion::V1_3_0);
  v.root_element = j.value("root_element", "");
  v.title = j.value("title", "");
  v.abstract_text = j.value("abstract", "");
  v.keywords = j.value("keywords", std::vector<std::string>{});
  v.contact_organization = get_optional<std::string>(j, "contact_organization");
  v.online_resource = get_optional<std::string>(j, "online_resource");
  v.supported_formats = j.value("supported_formats", std::vector<std::string>{});
  v.root_layers = j.value("root_layers", std::vector<LayerRecord>{});
  v.raw_size_bytes = j.value("raw_size_bytes", std::size_t{0});
  v.declared_software = enum_from(j, "declared_software", publisher_software_from_string,
                                  PublisherSoftware::Unknown);
}

void to_json(json& j, const TimeExtent& v) {
  auto date = [](const std::chrono::year_month_day& d) {
    return format_iso8601(std::chrono::sys_days{d}).substr(0, 10);
  };
  j = json{{"start", date(v.start)},
           {"end", date(v.end)},
           {"year_granularity", v.year_granularity},
           {"open_ended", v.open_ended}};
  if (v.period) {
    const auto& p = *v.period;
    j["period"] = json{{"years", p.years}, {"months", p.months}, {"days", p.days},
                       {"hours", p.hours}, {"minutes", p.minutes}, {"seconds", p.seconds}};
  } else {
    j["period"] = nullptr;
  }
}

}  // namespace wmsmon
