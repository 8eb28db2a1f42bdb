#include "wmsmon/model/publisher.hpp"

#include "wmsmon/core/url.hpp"

namespace wmsmon {

PublisherSoftware publisher_from_url(std::string_view url) {
  Url parsed;
  try {
    parsed = parse_url(url);
  } catch (const UrlError&) {
    return PublisherSoftware::Unknown;
  }
  const std::string path = to_lower(parsed.path);
  if (path.find("/arcgis/") != std::string::npos &&
      (path.find("/mapserver") != std::string::npos ||
       path.find("/services/") != std::string::npos)) {
    return PublisherSoftware::ArcgisServer;
  }
  if (path.find("/geoserver/") != std::string::npos) return PublisherSoftware::Geoserver;
  for (const auto& pair : split_query(parsed.query)) {
    if (iequals(pair.key, "map") && pair.has_equals) return PublisherSoftware::Mapserver;
  }
  return PublisherSoftware::Unknown;
}

PublisherSoftware detect_publisher_software(std::string_view url, const CapabilitiesDoc& doc) {
  if (const auto from_url = publisher_from_url(url); from_url != PublisherSoftware::Unknown) {
    return from_url;
  }
  return doc.declared_software;
}

}  // namespace wmsmon
