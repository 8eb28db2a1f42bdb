#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wmsmon/core/error.hpp"

namespace wmsmon {

enum class UrlErrc { MalformedUrl };
using UrlError = Error<UrlErrc>;

/// Components of an absolute http(s) URL. `query` excludes the leading '?'
/// and is kept raw (still percent-encoded).
struct Url {
  std::string scheme;
  std::string host;
  std::optional<int> port;
  std::string path = "/";
  std::string query;
  std::string fragment;
};

/// Parses an absolute http/https URL. Throws UrlError otherwise.
Url parse_url(std::string_view text);

std::string to_string(const Url& url);

/// Resolves `ref` against `base` (RFC 3986). Returns nullopt when the result
/// is not an http(s) URL.
std::optional<std::string> resolve_url(std::string_view base, std::string_view ref);

/// Lower-cased host of an absolute URL, or empty when unparseable.
std::string url_host(std::string_view text);

struct QueryPair {
  std::string key;
  std::string value;
  bool has_equals = true;

  friend bool operator==(const QueryPair&, const QueryPair&) = default;
};

/// Splits a raw query on '&'. Empty segments are dropped. Nothing is decoded.
std::vector<QueryPair> split_query(std::string_view query);
std::string join_query(const std::vector<QueryPair>& pairs);

std::string percent_decode(std::string_view text);

/// Decodes escapes of unreserved characters and upper-cases the hex digits
/// of every escape that must stay encoded.
std::string normalize_percent_encoding(std::string_view text);

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
/// `s` without leading and trailing ASCII whitespace.
std::string_view trim_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);
bool iends_with(std::string_view s, std::string_view suffix);

/// Stable short identifier derived from `key` (FNV-1a, 64 bit, hex).
std::string stable_id(std::string_view prefix, std::string_view key);

}  // namespace wmsmon
