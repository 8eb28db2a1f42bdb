#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wmsmon/crawler/candidates.hpp"
#include "wmsmon/net/transport.hpp"

namespace wmsmon {

/// Page-fetch allowance shared by everything one crawl run does.
class PageBudget {
 public:
  explicit PageBudget(std::size_t limit) : limit_(limit) {}
  bool take() {
    if (used_ >= limit_) return false;
    ++used_;
    return true;
  }
  std::size_t used() const { return used_; }
  std::size_t limit() const { return limit_; }

 private:
  std::size_t limit_;
  std::size_t used_ = 0;
};

/// Contents of one ArcGIS REST services directory page: absolute URLs of the
/// subfolder pages and of the MapServer service pages it lists.
struct ArcgisListing {
  std::vector<std::string> folders;
  std::vector<std::string> map_services;
};

/// True when the URL path points into an ArcGIS REST services tree.
bool is_arcgis_rest_url(std::string_view url);

/// WMS endpoint of a MapServer REST URL:
/// ".../rest/services/A/S/MapServer" -> ".../services/A/S/MapServer/WMSServer".
std::string arcgis_wms_url(std::string_view map_service_url);

/// JSON view ("?f=json"). nullopt unless it has the folders/services arrays.
std::optional<ArcgisListing> parse_arcgis_json(std::string_view body, std::string_view page_url);

/// HTML view. nullopt unless the page carries the directory's "Folders:" /
/// "Services:" lists with links into the services tree.
std::optional<ArcgisListing> parse_arcgis_html(std::string_view body, std::string_view page_url);

struct ArcgisWalkOptions {
  int max_depth = 4;
  Millis timeout{30'000};
};

struct ArcgisWalkResult {
  std::vector<CandidateUrl> candidates;
  std::size_t pages_fetched = 0;
  bool is_directory = false;  // the root page had directory structure
};

/// Recursively lists every MapServer under `root_url` and forms a
/// GetCapabilities candidate for each. Every directory page fetch is charged
/// to `budget`. Pages that merely look like a directory yield nothing.
ArcgisWalkResult walk_arcgis_directory(std::string_view root_url, HttpTransport& transport,
                                       PageBudget& budget, const ArcgisWalkOptions& options = {});

}  // namespace wmsmon
