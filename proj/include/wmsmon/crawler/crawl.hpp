#pragma once

#include <cstddef>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "wmsmon/core/clock.hpp"
#include "wmsmon/core/error.hpp"
#include "wmsmon/crawler/candidates.hpp"
#include "wmsmon/crawler/validate.hpp"
#include "wmsmon/model/types.hpp"
#include "wmsmon/net/rate_limiter.hpp"

namespace wmsmon {

enum class SeedKind { GenericPage, ArcgisDirectory, Catalog };

std::string_view to_string(SeedKind k);
std::optional<SeedKind> seed_kind_from_string(std::string_view s);

struct CrawlSeed {
  std::string url;
  SeedKind kind = SeedKind::GenericPage;
  int max_depth = 2;
  std::string note;
  // Recorded on services found from this seed; derived from kind if unset.
  std::optional<Provenance> provenance;
};

enum class SeedErrc { BadSeedLine };
using SeedError = Error<SeedErrc>;

/// One JSON object per line: {"url", "kind", "max_depth", "note",
/// "provenance"}. Blank lines and lines starting with '#' are skipped.
std::vector<CrawlSeed> load_seeds(std::istream& in);

struct CrawlOptions {
  std::size_t page_budget = 1000;
  Millis page_timeout{30'000};
  ValidationOptions validation;
  Millis politeness{1000};
  HostRateLimiter* limiter = nullptr;  // shared limiter; else one is made from `politeness`
  bool honor_robots = true;
  std::string user_agent = "wmsmon";
  CandidateRules rules;
  std::size_t workers = 4;  // validation threads; 0 validates inline
  int arcgis_max_depth = 4;
  // Dedup keys already on record; such candidates are not validated again.
  std::function<bool(const std::string&)> already_known;
  std::function<std::optional<GeoLocation>(const std::string& host)> locate;
};

struct DiscoveredService {
  ServiceRecord record;
  CapabilitiesDoc document;
};

struct CrawlStats {
  std::size_t pages_fetched = 0;
  std::size_t page_failures = 0;
  std::size_t robots_blocked = 0;
  std::size_t candidates = 0;
  std::size_t duplicates = 0;
  std::size_t validations = 0;
  std::size_t valid = 0;
  std::size_t not_wms = 0;
  std::size_t unreachable = 0;
};

struct CrawlResult {
  std::vector<DiscoveredService> services;
  std::vector<ValidationResult> validations;  // documents stripped
  CrawlStats stats;
};

/// Breadth-first discovery from the seeds. The budget counts page fetches
/// (seed pages, followed links, ArcGIS directory pages); GetCapabilities
/// validations and robots.txt lookups are not charged to it. Every request
/// is admitted through the per-host limiter.
CrawlResult crawl(const std::vector<CrawlSeed>& seeds, HttpTransport& transport, Clock& clock,
                  const CrawlOptions& options = {});

/// Record for a validated endpoint, keyed by its dedup key.
ServiceRecord make_service_record(const std::string& url, const CapabilitiesDoc& doc, Provenance from,
                                  Timestamp seen);

}  // namespace wmsmon
