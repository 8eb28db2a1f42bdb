#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wmsmon/model/types.hpp"

namespace wmsmon {

/// Every layer of the document in pre-order, with children detached.
std::vector<LayerRecord> flatten_layers(const CapabilitiesDoc& doc);

struct ServiceLayers {
  std::string service_id;
  std::vector<LayerRecord> layers;  // flattened
};

struct YearlyDistribution {
  std::map<int, std::size_t> layer_count;           // layers whose years include y
  std::map<int, std::size_t> services_with_latest;  // services whose newest layer year is y
  std::size_t dated_services = 0;

  /// Share of dated services whose newest layer year is before `year`.
  double share_latest_before(int year) const;
};

YearlyDistribution yearly_distribution(std::span<const ServiceLayers> services);

void to_json(nlohmann::json& j, const YearlyDistribution& d);

/// "EPSG:3857" for the usual spellings (case, URN and URL forms); other
/// identifiers are trimmed and uppercased.
std::string normalize_crs(std::string_view crs);

enum class Projection { WebMercator, UniversalTransverseMercator, AntarcticStereographic, Albers, Other };

std::string_view to_string(Projection p);

/// Projection family of a projected CRS code; Other for anything else,
/// including geographic CRSs.
Projection projection_of(std::string_view crs);

/// Geographic (latitude/longitude) CRS such as EPSG:4326 or CRS:84.
bool is_ellipsoidal_crs(std::string_view crs);

struct ProjectionShare {
  Projection projection = Projection::Other;
  std::size_t layers = 0;
  double share = 0.0;
  std::vector<std::string> sample_codes;  // most frequent first
};

/// Share of layers supporting each projection family and any ellipsoidal
/// CRS. Layers support several CRSs, so shares do not sum to 1. The
/// denominator is the layers that declare at least one CRS.
struct CrsTally {
  std::size_t layers_with_crs = 0;
  std::size_t ellipsoidal_layers = 0;
  double ellipsoidal_share = 0.0;
  std::vector<ProjectionShare> projections;  // descending share, Other excluded
};

CrsTally crs_tally(std::span<const LayerRecord> layers);

void to_json(nlohmann::json& j, const CrsTally& t);

struct VersionTally {
  std::size_t services = 0;
  std::map<WmsVersion, std::size_t> supporting;
};

VersionTally version_tally(std::span<const std::set<WmsVersion>> supported_per_service);

void to_json(nlohmann::json& j, const VersionTally& t);

/// Sector of a provider from its organization name and service URL. A
/// keyword heuristic and therefore approximate.
ProviderType classify_provider_type(std::string_view organization, std::string_view url = {});

/// Services per provider (case-insensitive name); services without a
/// provider name are not counted.
std::map<std::string, std::size_t> services_per_provider(std::span<const ServiceRecord> services);

}  // namespace wmsmon
