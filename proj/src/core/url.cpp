#include "wmsmon/core/url.hpp"

#include <curl/curl.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <memory>

namespace wmsmon {

namespace {

struct CurlUrlDeleter {
  void operator()(CURLU* h) const { curl_url_cleanup(h); }
};
using CurlUrlPtr = std::unique_ptr<CURLU, CurlUrlDeleter>;

std::optional<std::string> get_part(CURLU* h, CURLUPart part) {
  char* out = nullptr;
  if (curl_url_get(h, part, &out, 0) != CURLUE_OK || out == nullptr) return std::nullopt;
  std::string value(out);
  curl_free(out);
  return value;
}

bool is_http_scheme(std::string_view scheme) {
  return iequals(scheme, "http") || iequals(scheme, "https");
}

Url extract(CURLU* h, std::string_view original) {
  Url url;
  auto scheme = get_part(h, CURLUPART_SCHEME);
  auto host = get_part(h, CURLUPART_HOST);
  if (!scheme || !host || host->empty() || !is_http_scheme(*scheme)) {
    throw UrlError(UrlErrc::MalformedUrl, "not an absolute http(s) URL: " + std::string(original));
  }
  url.scheme = to_lower(*scheme);
  url.host = *host;
  if (auto port = get_part(h, CURLUPART_PORT)) url.port = std::stoi(*port);
  url.path = get_part(h, CURLUPART_PATH).value_or("/");
  if (url.path.empty()) url.path = "/";
  url.query = get_part(h, CURLUPART_QUERY).value_or("");
  url.fragment = get_part(h, CURLUPART_FRAGMENT).value_or("");
  return url;
}

std::optional<std::string_view> explicit_scheme(std::string_view ref) {
  const auto colon = ref.find(':');
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  if (!std::isalpha(static_cast<unsigned char>(ref[0]))) return std::nullopt;
  for (std::size_t i = 1; i < colon; ++i) {
    const auto c = static_cast<unsigned char>(ref[i]);
    if (!std::isalnum(c) && c != '+' && c != '-' && c != '.') return std::nullopt;
  }
  return ref.substr(0, colon);
}

constexpr unsigned kParseFlags = CURLU_NON_SUPPORT_SCHEME | CURLU_ALLOW_SPACE;

bool is_unreserved(unsigned char c) {
  return std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~';
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Url parse_url(std::string_view text) {
  // Reject schemeless input up front; curl would otherwise guess "http".
  const auto colon = text.find("://");
  if (colon == std::string_view::npos || !is_http_scheme(text.substr(0, colon))) {
    throw UrlError(UrlErrc::MalformedUrl, "not an absolute http(s) URL: " + std::string(text));
  }
  CurlUrlPtr h(curl_url());
  const std::string copy(text);
  if (curl_url_set(h.get(), CURLUPART_URL, copy.c_str(), kParseFlags) != CURLUE_OK) {
    throw UrlError(UrlErrc::MalformedUrl, "unparseable URL: " + copy);
  }
  return extract(h.get(), text);
}

std::string to_string(const Url& url) {
  std::string out = url.scheme + "://" + url.host;
  if (url.port) out += ":" + std::to_string(*url.port);
  out += url.path.empty() ? "/" : url.path;
  if (!url.query.empty()) out += "?" + url.query;
  if (!url.fragment.empty()) out += "#" + url.fragment;
  return out;
}

std::optional<std::string> resolve_url(std::string_view base, std::string_view ref) {
  // curl treats "mailto:x" or "javascript:x" as relative paths; catch any
  // explicit non-http scheme first.
  if (const auto scheme = explicit_scheme(ref); scheme && !is_http_scheme(*scheme)) {
    return std::nullopt;
  }
  CurlUrlPtr h(curl_url());
  const std::string base_copy(base);
  if (curl_url_set(h.get(), CURLUPART_URL, base_copy.c_str(), kParseFlags) != CURLUE_OK) {
    return std::nullopt;
  }
  const std::string ref_copy(ref);
  if (curl_url_set(h.get(), CURLUPART_URL, ref_copy.c_str(), kParseFlags) != CURLUE_OK) {
    return std::nullopt;
  }
  try {
    return to_string(extract(h.get(), ref));
  } catch (const UrlError&) {
    return std::nullopt;
  }
}

std::string url_host(std::string_view text) {
  try {
    return to_lower(parse_url(text).host);
  } catch (const UrlError&) {
    return {};
  }
}

std::vector<QueryPair> split_query(std::string_view query) {
  std::vector<QueryPair> pairs;
  std::size_t start = 0;
  while (start <= query.size()) {
    auto end = query.find('&', start);
    if (end == std::string_view::npos) end = query.size();
    const auto segment = query.substr(start, end - start);
    if (!segment.empty()) {
      const auto eq = segment.find('=');
      if (eq == std::string_view::npos) {
        pairs.push_back({std::string(segment), "", false});
      } else {
        pairs.push_back({std::string(segment.substr(0, eq)), std::string(segment.substr(eq + 1)), true});
      }
    }
    start = end + 1;
  }
  return pairs;
}

std::string join_query(const std::vector<QueryPair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    if (!out.empty()) out += '&';
    out += p.key;
    if (p.has_equals) out += "=" + p.value;
  }
  return out;
}

std::string percent_decode(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '%' && i + 2 < text.size()) {
      const int hi = hex_value(text[i + 1]);
      const int lo = hex_value(text[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out += static_cast<char>(hi * 16 + lo);
        i += 2;
        continue;
      }
    }
    out += text[i] == '+' ? ' ' : text[i];
  }
  return out;
}

std::string normalize_percent_encoding(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '%' && i + 2 < text.size()) {
      const int hi = hex_value(text[i + 1]);
      const int lo = hex_value(text[i + 2]);
      if (hi >= 0 && lo >= 0) {
        const auto c = static_cast<unsigned char>(hi * 16 + lo);
        if (is_unreserved(c)) {
          out += static_cast<char>(c);
        } else {
          out += '%';
          out += kHex[hi];
          out += kHex[lo];
        }
        i += 2;
        continue;
      }
    }
    out += text[i];
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

bool icontains(std::string_view haystack, std::string_view needle) {
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

bool iends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && iequals(s.substr(s.size() - suffix.size()), suffix);
}

std::string_view trim_ascii(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(first, last - first + 1);
}

std::string stable_id(std::string_view prefix, std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(prefix);
  out += '-';
  for (int shift = 60; shift >= 0; shift -= 4) out += kHex[(h >> shift) & 0xF];
  return out;
}

}  // namespace wmsmon
