#include "wmsmon/model/types.hpp"

#include <array>
#include <utility>

namespace wmsmon {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table,
                        std::string_view s) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "unknown";
}

constexpr std::array<std::pair<Provenance, std::string_view>, 4> kProvenance{{
    {Provenance::SeedPage, "seed-page"},
    {Provenance::SearchResultPage, "search-result-page"},
    {Provenance::ArcgisDirectory, "arcgis-directory"},
    {Provenance::Manual, "manual"},
}};

constexpr std::array<std::pair<ProviderType, std::string_view>, 6> kProviderType{{
    {ProviderType::Government, "government"},
    {ProviderType::Academic, "academic"},
    {ProviderType::Intergovernmental, "intergovernmental"},
    {ProviderType::Industry, "industry"},
    {ProviderType::Nonprofit, "nonprofit"},
    {ProviderType::Unknown, "unknown"},
}};

constexpr std::array<std::pair<PublisherSoftware, std::string_view>, 4> kSoftware{{
    {PublisherSoftware::ArcgisServer, "arcgis-server"},
    {PublisherSoftware::Geoserver, "geoserver"},
    {PublisherSoftware::Mapserver, "mapserver"},
    {PublisherSoftware::Unknown, "unknown"},
}};

constexpr std::array<std::pair<Liveness, std::string_view>, 3> kLiveness{{
    {Liveness::Valid, "valid"},
    {Liveness::Invalid, "invalid"},
    {Liveness::Unknown, "unknown"},
}};

constexpr std::array<std::pair<WmsVersion, std::string_view>, 4> kVersion{{
    {WmsVersion::V1_0_0, "1.0.0"},
    {WmsVersion::V1_1_0, "1.1.0"},
    {WmsVersion::V1_1_1, "1.1.1"},
    {WmsVersion::V1_3_0, "1.3.0"},
}};

}  // namespace

std::string_view to_string(Provenance v) { return name_of(kProvenance, v); }
std::string_view to_string(ProviderType v) { return name_of(kProviderType, v); }
std::string_view to_string(PublisherSoftware v) { return name_of(kSoftware, v); }
std::string_view to_string(Liveness v) { return name_of(kLiveness, v); }
std::string_view to_string(WmsVersion v) { return name_of(kVersion, v); }

std::optional<Provenance> provenance_from_string(std::string_view s) { return lookup(kProvenance, s); }
std::optional<ProviderType> provider_type_from_string(std::string_view s) {
  return lookup(kProviderType, s);
}
std::optional<PublisherSoftware> publisher_software_from_string(std::string_view s) {
  return lookup(kSoftware, s);
}
std::optional<Liveness> liveness_from_string(std::string_view s) { return lookup(kLiveness, s); }
std::optional<WmsVersion> wms_version_from_string(std::string_view s) { return lookup(kVersion, s); }

}  // namespace wmsmon
