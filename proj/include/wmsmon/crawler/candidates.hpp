#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace wmsmon {

enum class MatchRule { ExplicitKvp, PrefixFormed, ArcgisDerived };

std::string_view to_string(MatchRule r);

struct CandidateUrl {
  std::string url;
  std::string source_page;
  std::optional<std::string> anchor_text;
  MatchRule match_rule = MatchRule::PrefixFormed;
};

/// Which links count as WMS URL prefixes. Matching is case-insensitive.
struct CandidateRules {
  std::vector<std::string> anchor_keywords{"WMS", "Web Map Service"};
  std::vector<std::string> path_suffixes{"/wms", "/ows", "/WMSServer"};

  static CandidateRules from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// A hyperlink found on a page, resolved against the page URL.
struct PageLink {
  std::string url;
  std::optional<std::string> anchor_text;
};

/// All http(s) links of an HTML or plain-text page: anchor hrefs (with their
/// visible text) followed by bare URLs appearing in the text.
std::vector<PageLink> extract_links(std::string_view page, std::string_view base_url);

/// Classifies one link, or nullopt when it is not a WMS candidate.
std::optional<MatchRule> match_candidate(const PageLink& link, const CandidateRules& rules = {});

/// WMS candidates on a page, duplicates (same dedup key) removed.
std::vector<CandidateUrl> extract_candidate_urls(std::string_view page, std::string_view base_url,
                                                 const CandidateRules& rules = {});

/// Ensures the URL carries exactly one service=WMS and one
/// request=GetCapabilities pair, appending what is missing. Other query
/// parameters and their order are untouched; the fragment is dropped.
/// Idempotent. Throws UrlError for non-http(s) input.
std::string form_getcapabilities_url(std::string_view prefix);

/// Identity of a service endpoint: lower-case scheme and host, no default
/// port, normalized percent escapes, query pairs sorted with the
/// request/version parameters removed. Idempotent. Throws UrlError.
std::string dedup_key(std::string_view url);

/// Identity of the service a candidate URL would be validated as:
/// dedup_key of its GetCapabilities form. Throws UrlError.
std::string service_key(std::string_view url);

}  // namespace wmsmon
