#include "wmsmon/crawler/crawl.hpp"

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <set>

#include <json.hpp>

#include "wmsmon/core/url.hpp"
#include "wmsmon/core/worker_pool.hpp"
#include "wmsmon/crawler/arcgis.hpp"
#include "wmsmon/crawler/robots.hpp"
#include "wmsmon/model/publisher.hpp"

namespace wmsmon {

namespace {

constexpr std::string_view kSkippedExtensions[] = {".pdf", ".zip", ".gz",  ".png", ".jpg", ".jpeg",
                                                   ".gif", ".tif", ".tiff", ".doc", ".docx", ".xls",
                                                   ".xlsx", ".mp4", ".kmz", ".shp"};

bool worth_fetching(std::string_view url) {
  try {
    const auto path = parse_url(url).path;
    for (auto ext : kSkippedExtensions) {
      if (iends_with(path, ext)) return false;
    }
    return true;
  } catch (const UrlError&) {
    return false;
  }
}

bool names_wms_service(std::string_view url) {
  try {
    for (const auto& p : split_query(parse_url(url).query)) {
      if (iequals(percent_decode(p.key), "service") && iequals(percent_decode(p.value), "WMS")) return true;
    }
  } catch (const UrlError&) {
  }
  return false;
}

std::string page_key(std::string_view url) {
  try {
    return dedup_key(url);
  } catch (const UrlError&) {
    return std::string(url);
  }
}

bool is_capabilities_root(std::string_view body) {
  const auto root = xml_root_element(body);
  return root && (*root == "WMT_MS_Capabilities" || *root == "WMS_Capabilities");
}

struct PageTask {
  std::string url;
  int depth = 0;
  int max_depth = 0;
  Provenance provenance = Provenance::SeedPage;
};

class Crawler {
 public:
  Crawler(HttpTransport& transport, Clock& clock, const CrawlOptions& options)
      : clock_(clock),
        options_(options),
        owned_limiter_(options.limiter ? nullptr : std::make_unique<HostRateLimiter>(clock, options.politeness)),
        polite_(transport, options.limiter ? *options.limiter : *owned_limiter_),
        budget_(options.page_budget) {
    if (options.workers > 0) pool_ = std::make_unique<WorkerPool>(options.workers);
  }

  CrawlResult run(const std::vector<CrawlSeed>& seeds) {
    for (const auto& seed : seeds) start_seed(seed);
    for (;;) {
      while (!queue_.empty()) {
        auto task = std::move(queue_.front());
        queue_.pop_front();
        visit(task);
      }
      if (pool_) pool_->wait_idle();
      std::lock_guard lock(mu_);
      if (fallback_.empty()) break;
      for (auto& t : fallback_) enqueue(std::move(t));
      fallback_.clear();
    }
    std::lock_guard lock(mu_);
    result_.stats.pages_fetched = budget_.used();
    return std::move(result_);
  }

 private:
  void start_seed(const CrawlSeed& seed) {
    const auto provenance = seed.provenance.value_or(
        seed.kind == SeedKind::ArcgisDirectory ? Provenance::ArcgisDirectory : Provenance::SeedPage);
    if (seed.kind == SeedKind::ArcgisDirectory) {
      walk_arcgis(seed.url);
      return;
    }
    const PageTask task{seed.url, 0, seed.max_depth, provenance};
    // A seed that is itself an endpoint is validated rather than crawled.
    if (const auto rule = match_candidate({seed.url, std::nullopt}, options_.rules)) {
      dispatch({seed.url, seed.url, std::nullopt, *rule}, task);
      return;
    }
    enqueue(task);
  }

  void enqueue(PageTask task) {
    if (!visited_pages_.insert(page_key(task.url)).second) return;
    queue_.push_back(std::move(task));
  }

  bool robots_allow(const std::string& url) {
    if (!options_.honor_robots) return true;
    Url parsed;
    try {
      parsed = parse_url(url);
    } catch (const UrlError&) {
      return false;
    }
    const auto origin = parsed.scheme + "://" + to_lower(parsed.host) +
                        (parsed.port ? ":" + std::to_string(*parsed.port) : "");
    auto it = robots_.find(origin);
    if (it == robots_.end()) {
      HttpRequest req{origin + "/robots.txt"};
      req.timeout = options_.page_timeout;
      const auto r = polite_.fetch(req);
      RobotsRules rules;
      if (r.transport_ok() && r.status == 200) rules = RobotsRules::parse(r.body, options_.user_agent);
      it = robots_.emplace(origin, std::move(rules)).first;
    }
    return it->second.allowed(parsed.path + (parsed.query.empty() ? "" : "?" + parsed.query));
  }

  void visit(const PageTask& task) {
    if (!robots_allow(task.url)) {
      std::lock_guard lock(mu_);
      ++result_.stats.robots_blocked;
      return;
    }
    if (!budget_.take()) {
      queue_.clear();
      return;
    }
    HttpRequest req{task.url};
    req.timeout = options_.page_timeout;
    const auto response = polite_.fetch(req);
    if (!response.transport_ok() || response.status != 200) {
      std::lock_guard lock(mu_);
      ++result_.stats.page_failures;
      return;
    }
    if (is_capabilities_root(response.body)) {
      admit_page_document(task, response.body);
      return;
    }
    const auto base = response.effective_url.empty() ? task.url : response.effective_url;
    for (auto& link : extract_links(response.body, base)) {
      if (const auto rule = match_candidate(link, options_.rules)) {
        dispatch({link.url, task.url, link.anchor_text, *rule}, task);
      } else if (is_arcgis_rest_url(link.url)) {
        walk_arcgis(link.url);
      } else if (task.depth < task.max_depth && worth_fetching(link.url)) {
        enqueue({link.url, task.depth + 1, task.max_depth, task.provenance});
      }
    }
  }

  void walk_arcgis(const std::string& url) {
    const auto root = page_key(url.substr(0, url.find_first_of("?#")));
    if (!walked_arcgis_.insert(root).second) return;
    ArcgisWalkOptions walk_options;
    walk_options.max_depth = options_.arcgis_max_depth;
    walk_options.timeout = options_.page_timeout;
    auto walk = walk_arcgis_directory(url, polite_, budget_, walk_options);
    // Candidates from a directory are never crawled as pages.
    const PageTask origin{url, 0, -1, Provenance::ArcgisDirectory};
    for (auto& c : walk.candidates) dispatch(std::move(c), origin);
  }

  void admit_page_document(const PageTask& task, std::string_view body) {
    std::string key;
    try {
      key = service_key(task.url);
    } catch (const UrlError&) {
      return;
    }
    {
      std::lock_guard lock(mu_);
      if (!claimed_.insert(key).second || (options_.already_known && options_.already_known(key))) {
        ++result_.stats.duplicates;
        return;
      }
    }
    ValidationResult r;
    r.candidate = {task.url, task.url, std::nullopt, MatchRule::ExplicitKvp};
    r.request_url = task.url;
    r.http_status = 200;
    try {
      auto doc = parse_capabilities(body, options_.validation.parse);
      r.verdict = Verdict::ValidWms;
      r.root_element = doc.root_element;
      std::lock_guard lock(mu_);
      ++result_.stats.validations;
      ++result_.stats.valid;
      add_service(task.url, std::move(doc), task.provenance);
      result_.validations.push_back(std::move(r));
    } catch (const ParseError&) {
    }
  }

  void dispatch(CandidateUrl candidate, const PageTask& from) {
    std::string key;
    try {
      key = service_key(candidate.url);
    } catch (const UrlError&) {
      return;
    }
    {
      std::lock_guard lock(mu_);
      if (!claimed_.insert(key).second || (options_.already_known && options_.already_known(key))) {
        ++result_.stats.duplicates;
        return;
      }
      ++result_.stats.candidates;
    }
    // A failed candidate that does not name the WMS service may still be an
    // ordinary page worth crawling.
    std::optional<PageTask> fallback;
    const int next_depth = candidate.url == from.url ? from.depth : from.depth + 1;
    if (next_depth <= from.max_depth && !names_wms_service(candidate.url)) {
      fallback = PageTask{candidate.url, next_depth, from.max_depth, from.provenance};
    }
    auto job = [this, candidate = std::move(candidate), provenance = from.provenance, fallback] {
      auto r = validate_wms_url(candidate, polite_, options_.validation);
      merge(std::move(r), provenance, fallback);
    };
    if (pool_) pool_->submit(std::move(job));
    else job();
  }

  void merge(ValidationResult r, Provenance provenance, const std::optional<PageTask>& fallback) {
    std::lock_guard lock(mu_);
    auto& s = result_.stats;
    ++s.validations;
    switch (r.verdict) {
      case Verdict::ValidWms: ++s.valid; break;
      case Verdict::NotWms: ++s.not_wms; break;
      case Verdict::Unreachable: ++s.unreachable; break;
    }
    if (r.verdict == Verdict::ValidWms) {
      add_service(r.request_url, std::move(*r.document), provenance);
    } else if (r.verdict == Verdict::NotWms && fallback) {
      fallback_.push_back(*fallback);
    }
    r.document.reset();
    result_.validations.push_back(std::move(r));
  }

  // Caller holds mu_.
  void add_service(const std::string& url, CapabilitiesDoc doc, Provenance provenance) {
    auto record = make_service_record(url, doc, provenance, clock_.now());
    if (options_.locate) record.server_location = options_.locate(url_host(url));
    result_.services.push_back({std::move(record), std::move(doc)});
  }

  Clock& clock_;
  const CrawlOptions& options_;
  std::unique_ptr<HostRateLimiter> owned_limiter_;
  RateLimitedTransport polite_;
  PageBudget budget_;
  std::unique_ptr<WorkerPool> pool_;

  // Coordinator-only state.
  std::deque<PageTask> queue_;
  std::set<std::string> visited_pages_;
  std::set<std::string> walked_arcgis_;
  std::map<std::string, RobotsRules> robots_;

  // Shared with validation workers.
  std::mutex mu_;
  std::set<std::string> claimed_;
  std::vector<PageTask> fallback_;
  CrawlResult result_;
};

}  // namespace

std::string_view to_string(SeedKind k) {
  switch (k) {
    case SeedKind::GenericPage: return "generic-page";
    case SeedKind::ArcgisDirectory: return "arcgis-directory";
    case SeedKind::Catalog: return "catalog";
  }
  return "unknown";
}

std::optional<SeedKind> seed_kind_from_string(std::string_view s) {
  for (auto k : {SeedKind::GenericPage, SeedKind::ArcgisDirectory, SeedKind::Catalog}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::vector<CrawlSeed> load_seeds(std::istream& in) {
  std::vector<CrawlSeed> seeds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto where = "seed line " + std::to_string(line_no) + ": ";
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("url") || !j["url"].is_string()) {
      throw SeedError(SeedErrc::BadSeedLine, where + "expected an object with a url");
    }
    CrawlSeed seed;
    seed.url = j["url"].get<std::string>();
    try {
      parse_url(seed.url);
    } catch (const UrlError& e) {
      throw SeedError(SeedErrc::BadSeedLine, where + e.what());
    }
    if (j.contains("kind")) {
      const auto kind = seed_kind_from_string(j.value("kind", std::string{}));
      if (!kind) throw SeedError(SeedErrc::BadSeedLine, where + "unknown kind");
      seed.kind = *kind;
    }
    if (j.contains("max_depth")) {
      if (!j["max_depth"].is_number_integer() || j["max_depth"].get<int>() < 0) {
        throw SeedError(SeedErrc::BadSeedLine, where + "max_depth must be a non-negative integer");
      }
      seed.max_depth = j["max_depth"].get<int>();
    }
    seed.note = j.value("note", std::string{});
    if (j.contains("provenance")) {
      seed.provenance = provenance_from_string(j.value("provenance", std::string{}));
      if (!seed.provenance) throw SeedError(SeedErrc::BadSeedLine, where + "unknown provenance");
    }
    seeds.push_back(std::move(seed));
  }
  return seeds;
}

CrawlResult crawl(const std::vector<CrawlSeed>& seeds, HttpTransport& transport, Clock& clock,
                  const CrawlOptions& options) {
  return Crawler(transport, clock, options).run(seeds);
}

ServiceRecord make_service_record(const std::string& url, const CapabilitiesDoc& doc, Provenance from,
                                  Timestamp seen) {
  ServiceRecord r;
  r.canonical_url = service_key(url);
  r.id = stable_id("svc", r.canonical_url);
  r.discovered_from = from;
  r.first_seen = r.last_seen = seen;
  if (doc.contact_organization && !doc.contact_organization->empty()) r.provider_name = doc.contact_organization;
  r.publisher_software = detect_publisher_software(url, doc);
  r.liveness = Liveness::Valid;
  return r;
}

}  // namespace wmsmon
