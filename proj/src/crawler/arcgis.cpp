#include "wmsmon/crawler/arcgis.hpp"

#include <deque>
#include <set>

#include <json.hpp>

#include "wmsmon/core/url.hpp"

namespace wmsmon {

namespace {

constexpr std::string_view kRestServices = "/rest/services";

std::string strip_query(std::string_view url) {
  return std::string(url.substr(0, url.find_first_of("?#")));
}

std::string without_trailing_slash(std::string s) {
  while (s.size() > 1 && s.back() == '/') s.pop_back();
  return s;
}

// URL of the services root ("…/rest/services") for a page inside the tree.
std::string services_root(std::string_view page_url) {
  const auto base = strip_query(page_url);
  const auto pos = to_lower(base).find(kRestServices);
  if (pos == std::string::npos) return without_trailing_slash(base);
  return base.substr(0, pos + kRestServices.size());
}

std::string json_view(std::string_view page_url) {
  std::string base = strip_query(page_url);
  const auto q = page_url.find('?');
  std::vector<QueryPair> pairs;
  if (q != std::string_view::npos) {
    for (auto& p : split_query(page_url.substr(q + 1, page_url.find('#') - q - 1))) {
      if (!iequals(p.key, "f")) pairs.push_back(std::move(p));
    }
  }
  pairs.push_back({"f", "json", true});
  return base + "?" + join_query(pairs);
}

bool is_map_service(std::string_view url) {
  return iends_with(without_trailing_slash(strip_query(url)), "/MapServer");
}

// The <ul> following a section label such as "Folders:".
std::optional<std::string_view> section_list(std::string_view body, std::string_view label) {
  const auto lower = to_lower(body);
  const auto at = lower.find(to_lower(label));
  if (at == std::string::npos) return std::nullopt;
  const auto ul = lower.find("<ul", at);
  if (ul == std::string::npos) return std::nullopt;
  const auto end = lower.find("</ul", ul);
  return body.substr(ul, (end == std::string::npos ? body.size() : end) - ul);
}

}  // namespace

bool is_arcgis_rest_url(std::string_view url) {
  try {
    return icontains(parse_url(url).path, kRestServices);
  } catch (const UrlError&) {
    return false;
  }
}

std::string arcgis_wms_url(std::string_view map_service_url) {
  std::string base = without_trailing_slash(strip_query(map_service_url));
  const auto pos = to_lower(base).find(kRestServices);
  if (pos != std::string::npos) base.replace(pos, kRestServices.size(), "/services");
  return base + "/WMSServer";
}

std::optional<ArcgisListing> parse_arcgis_json(std::string_view body, std::string_view page_url) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  const auto folders = j.find("folders");
  const auto services = j.find("services");
  if (folders == j.end() || services == j.end() || !folders->is_array() || !services->is_array()) {
    return std::nullopt;
  }
  const auto root = services_root(page_url);
  ArcgisListing listing;
  for (const auto& f : *folders) {
    if (f.is_string() && !f.get<std::string>().empty()) listing.folders.push_back(root + "/" + f.get<std::string>());
  }
  for (const auto& s : *services) {
    if (!s.is_object() || !s.contains("name") || !s["name"].is_string()) continue;
    const auto type = s.value("type", std::string{});
    if (!iequals(type, "MapServer")) continue;
    listing.map_services.push_back(root + "/" + s["name"].get<std::string>() + "/MapServer");
  }
  return listing;
}

std::optional<ArcgisListing> parse_arcgis_html(std::string_view body, std::string_view page_url) {
  ArcgisListing listing;
  bool structured = false;
  if (const auto list = section_list(body, "Folders:")) {
    for (const auto& link : extract_links(*list, page_url)) {
      if (!is_arcgis_rest_url(link.url) || is_map_service(link.url)) continue;
      listing.folders.push_back(strip_query(link.url));
      structured = true;
    }
  }
  if (const auto list = section_list(body, "Services:")) {
    for (const auto& link : extract_links(*list, page_url)) {
      if (!is_arcgis_rest_url(link.url)) continue;
      structured = true;
      if (is_map_service(link.url)) listing.map_services.push_back(without_trailing_slash(strip_query(link.url)));
    }
  }
  if (!structured) return std::nullopt;
  return listing;
}

ArcgisWalkResult walk_arcgis_directory(std::string_view root_url, HttpTransport& transport,
                                       PageBudget& budget, const ArcgisWalkOptions& options) {
  ArcgisWalkResult result;
  std::deque<std::pair<std::string, int>> queue{{strip_query(root_url), 0}};
  std::set<std::string> visited{to_lower(without_trailing_slash(strip_query(root_url)))};
  std::set<std::string> emitted;

  auto fetch = [&](const std::string& url) -> std::optional<HttpResponse> {
    if (!budget.take()) return std::nullopt;
    ++result.pages_fetched;
    HttpRequest req{url};
    req.timeout = options.timeout;
    auto response = transport.fetch(req);
    if (!response.transport_ok() || response.status != 200) return std::nullopt;
    return response;
  };

  bool first = true;
  while (!queue.empty()) {
    auto [url, depth] = queue.front();
    queue.pop_front();
    std::optional<ArcgisListing> listing;
    if (auto json = fetch(json_view(url))) listing = parse_arcgis_json(json->body, url);
    if (!listing) {
      if (budget.used() >= budget.limit()) break;
      if (auto html = fetch(url)) listing = parse_arcgis_html(html->body, url);
    }
    if (first) result.is_directory = listing.has_value();
    first = false;
    if (!listing) continue;

    for (const auto& service : listing->map_services) {
      const auto wms = form_getcapabilities_url(arcgis_wms_url(service));
      if (!emitted.insert(to_lower(wms)).second) continue;
      result.candidates.push_back({wms, url, std::nullopt, MatchRule::ArcgisDerived});
    }
    if (depth >= options.max_depth) continue;
    for (const auto& folder : listing->folders) {
      if (visited.insert(to_lower(without_trailing_slash(folder))).second) queue.emplace_back(folder, depth + 1);
    }
  }
  return result;
}

}  // namespace wmsmon
