#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wmsmon/core/time.hpp"

namespace wmsmon {

enum class Provenance { SeedPage, SearchResultPage, ArcgisDirectory, Manual };
enum class ProviderType { Government, Academic, Intergovernmental, Industry, Nonprofit, Unknown };
enum class PublisherSoftware { ArcgisServer, Geoserver, Mapserver, Unknown };
enum class Liveness { Valid, Invalid, Unknown };
enum class WmsVersion { V1_0_0, V1_1_0, V1_1_1, V1_3_0 };

inline constexpr WmsVersion kAllWmsVersions[] = {WmsVersion::V1_0_0, WmsVersion::V1_1_0,
                                                 WmsVersion::V1_1_1, WmsVersion::V1_3_0};

std::string_view to_string(Provenance v);
std::string_view to_string(ProviderType v);
std::string_view to_string(PublisherSoftware v);
std::string_view to_string(Liveness v);
std::string_view to_string(WmsVersion v);

std::optional<Provenance> provenance_from_string(std::string_view s);
std::optional<ProviderType> provider_type_from_string(std::string_view s);
std::optional<PublisherSoftware> publisher_software_from_string(std::string_view s);
std::optional<Liveness> liveness_from_string(std::string_view s);
std::optional<WmsVersion> wms_version_from_string(std::string_view s);

struct GeoLocation {
  double lat = 0.0;
  double lon = 0.0;
  std::string country;
  std::string continent;

  bool valid() const { return lat >= -90 && lat <= 90 && lon >= -180 && lon <= 180; }
};

struct ServiceRecord {
  std::string id;
  std::string canonical_url;
  Provenance discovered_from = Provenance::Manual;
  Timestamp first_seen{};
  Timestamp last_seen{};
  std::optional<GeoLocation> server_location;
  std::optional<std::string> provider_name;
  ProviderType provider_type = ProviderType::Unknown;
  PublisherSoftware publisher_software = PublisherSoftware::Unknown;
  Liveness liveness = Liveness::Unknown;
};

/// Geographic extent in degrees. west > east means the box crosses the
/// antimeridian and is kept that way.
struct GeoBBox {
  double west = 0.0;
  double south = 0.0;
  double east = 0.0;
  double north = 0.0;

  bool valid() const {
    return south <= north && west >= -180 && west <= 180 && east >= -180 && east <= 180 &&
           south >= -90 && north <= 90;
  }
  bool crosses_antimeridian() const { return west > east; }

  friend bool operator==(const GeoBBox&, const GeoBBox&) = default;
};

/// A BoundingBox element advertised for one specific CRS.
struct CrsBBox {
  std::string crs;
  double minx = 0.0;
  double miny = 0.0;
  double maxx = 0.0;
  double maxy = 0.0;
};

struct LayerRecord {
  std::optional<std::string> name;
  std::string title;
  std::string abstract_text;
  std::vector<std::string> keywords;
  std::optional<GeoBBox> geographic_bbox;
  // Effective CRS list: the layer's own entries followed by inherited ones.
  std::vector<std::string> crs_list;
  std::vector<CrsBBox> bounding_boxes;
  std::optional<std::string> time_dimension;
  std::vector<LayerRecord> children;

  bool is_named() const { return name.has_value() && !name->empty(); }
  bool is_cascading_parent() const { return !children.empty(); }
};

struct CapabilitiesDoc {
  WmsVersion service_version = WmsVersion::V1_3_0;
  std::string root_element;
  std::string title;
  std::string abstract_text;
  std::vector<std::string> keywords;
  std::optional<std::string> contact_organization;
  std::optional<std::string> online_resource;
  std::vector<std::string> supported_formats;
  std::vector<LayerRecord> root_layers;
  std::size_t raw_size_bytes = 0;
  // Server software as evidenced by the document itself (namespaces,
  // generator comments, service title).
  PublisherSoftware declared_software = PublisherSoftware::Unknown;
};

/// ISO-8601 duration such as "P8D" or "PT6H".
struct IsoDuration {
  int years = 0;
  int months = 0;
  int days = 0;
  int hours = 0;
  int minutes = 0;
  double seconds = 0.0;

  bool positive() const {
    return years > 0 || months > 0 || days > 0 || hours > 0 || minutes > 0 || seconds > 0;
  }
  friend bool operator==(const IsoDuration&, const IsoDuration&) = default;
};

struct TimeExtent {
  std::chrono::year_month_day start{};
  std::chrono::year_month_day end{};
  std::optional<IsoDuration> period;
  bool year_granularity = false;
  // End given as "current"/"now"/"present"; `end` then equals `start`.
  bool open_ended = false;
};

}  // namespace wmsmon
