#include "wmsmon/crawler/candidates.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "wmsmon/core/url.hpp"

namespace wmsmon {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  return pos + prefix.size() <= s.size() && iequals(s.substr(pos, prefix.size()), prefix);
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x110000) {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += s[i];
      continue;
    }
    const auto name = s.substr(i + 1, semi - i - 1);
    bool ok = true;
    if (name == "amp") out += '&';
    else if (name == "lt") out += '<';
    else if (name == "gt") out += '>';
    else if (name == "quot") out += '"';
    else if (name == "apos") out += '\'';
    else if (name == "nbsp") out += ' ';
    else if (name.size() > 1 && name[0] == '#') {
      try {
        const bool hex = name[1] == 'x' || name[1] == 'X';
        append_utf8(out, std::stoul(std::string(name.substr(hex ? 2 : 1)), nullptr, hex ? 16 : 10));
      } catch (const std::exception&) {
        ok = false;
      }
    } else {
      ok = false;
    }
    if (ok) i = semi;
    else out += s[i];
  }
  return out;
}

std::string collapse_space(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
    } else {
      if (pending) out += ' ';
      pending = false;
      out += c;
    }
  }
  return out;
}

std::string strip_tags(std::string_view s) {
  std::string out;
  bool in_tag = false;
  for (char c : s) {
    if (c == '<') in_tag = true;
    else if (c == '>') in_tag = false;
    else if (!in_tag) out += c;
  }
  return out;
}

// Attributes of a start tag, from just after the element name to '>'.
std::optional<std::string> attribute(std::string_view tag, std::string_view wanted) {
  std::size_t i = 0;
  while (i < tag.size()) {
    while (i < tag.size() && (is_space(tag[i]) || tag[i] == '/')) ++i;
    const auto name_start = i;
    while (i < tag.size() && !is_space(tag[i]) && tag[i] != '=' && tag[i] != '/') ++i;
    const auto name = tag.substr(name_start, i - name_start);
    while (i < tag.size() && is_space(tag[i])) ++i;
    std::string value;
    if (i < tag.size() && tag[i] == '=') {
      ++i;
      while (i < tag.size() && is_space(tag[i])) ++i;
      if (i < tag.size() && (tag[i] == '"' || tag[i] == '\'')) {
        const char q = tag[i++];
        const auto end = tag.find(q, i);
        const auto stop = end == std::string_view::npos ? tag.size() : end;
        value = tag.substr(i, stop - i);
        i = stop + 1;
      } else {
        const auto start = i;
        while (i < tag.size() && !is_space(tag[i])) ++i;
        value = tag.substr(start, i - start);
      }
    }
    if (!name.empty() && iequals(name, wanted)) return decode_entities(value);
    if (name.empty()) ++i;
  }
  return std::nullopt;
}

bool url_terminator(char c) {
  return is_space(c) || c == '<' || c == '>' || c == '"' || c == '\'' || c == '`' || c == '{' ||
         c == '}' || c == '|' || c == '\\' || c == '^';
}

void scan_text_urls(std::string_view text, std::vector<std::string>& out) {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto h = text.find_first_of("hH", i);
    if (h == std::string_view::npos) break;
    std::size_t skip = 0;
    if (starts_with_ci(text, h, "http://")) skip = 7;
    else if (starts_with_ci(text, h, "https://")) skip = 8;
    if (skip == 0) {
      i = h + 1;
      continue;
    }
    auto end = h + skip;
    while (end < text.size() && !url_terminator(text[end])) ++end;
    auto url = std::string(text.substr(h, end - h));
    // Sentence punctuation and unbalanced closing brackets are not part of
    // a URL written in prose.
    while (!url.empty() && std::string_view(".,;:!?)]").find(url.back()) != std::string_view::npos) {
      if (url.back() == ')' && std::count(url.begin(), url.end(), '(') >=
                                   std::count(url.begin(), url.end(), ')')) {
        break;
      }
      url.pop_back();
    }
    if (url.size() > skip) out.push_back(decode_entities(url));
    i = end;
  }
}

std::string_view raw_text_end_tag(std::string_view element) {
  if (iequals(element, "script")) return "</script";
  if (iequals(element, "style")) return "</style";
  return {};
}

const QueryPair* find_key(const std::vector<QueryPair>& pairs, std::string_view key) {
  for (const auto& p : pairs) {
    if (iequals(percent_decode(p.key), key)) return &p;
  }
  return nullptr;
}

bool value_is(const QueryPair* p, std::string_view value) {
  return p != nullptr && iequals(percent_decode(p->value), value);
}

}  // namespace

std::string_view to_string(MatchRule r) {
  switch (r) {
    case MatchRule::ExplicitKvp: return "explicit-kvp";
    case MatchRule::PrefixFormed: return "prefix-formed";
    case MatchRule::ArcgisDerived: return "arcgis-derived";
  }
  return "unknown";
}

CandidateRules CandidateRules::from_json(const nlohmann::json& j) {
  CandidateRules r;
  if (j.contains("anchor_keywords")) r.anchor_keywords = j.at("anchor_keywords").get<std::vector<std::string>>();
  if (j.contains("path_suffixes")) r.path_suffixes = j.at("path_suffixes").get<std::vector<std::string>>();
  return r;
}

nlohmann::json CandidateRules::to_json() const {
  return {{"anchor_keywords", anchor_keywords}, {"path_suffixes", path_suffixes}};
}

std::vector<PageLink> extract_links(std::string_view page, std::string_view base_url) {
  std::vector<PageLink> anchors;
  std::vector<std::string> bare;
  std::size_t i = 0;
  while (i < page.size()) {
    const auto lt = page.find('<', i);
    scan_text_urls(page.substr(i, (lt == std::string_view::npos ? page.size() : lt) - i), bare);
    if (lt == std::string_view::npos) break;

    if (page.compare(lt, 4, "<!--") == 0) {
      const auto close = page.find("-->", lt + 4);
      i = close == std::string_view::npos ? page.size() : close + 3;
      continue;
    }
    auto name_end = lt + 1;
    while (name_end < page.size() && std::isalnum(static_cast<unsigned char>(page[name_end]))) ++name_end;
    const auto element = page.substr(lt + 1, name_end - lt - 1);
    const auto gt = page.find('>', name_end);
    if (element.empty() || gt == std::string_view::npos) {
      i = lt + 1;
      continue;
    }
    const auto attrs = page.substr(name_end, gt - name_end);
    i = gt + 1;

    if (const auto raw_end = raw_text_end_tag(element); !raw_end.empty()) {
      const auto close = to_lower(page.substr(i)).find(raw_end);
      i = close == std::string::npos ? page.size() : i + close;
      continue;
    }
    if (!iequals(element, "a") && !iequals(element, "area")) continue;
    const auto href = attribute(attrs, "href");
    if (!href) continue;

    std::optional<std::string> text;
    if (iequals(element, "a")) {
      const auto rest = to_lower(page.substr(i));
      const auto close = rest.find("</a");
      const auto inner = page.substr(i, close == std::string::npos ? 0 : close);
      auto visible = collapse_space(decode_entities(strip_tags(inner)));
      if (!visible.empty()) text = std::move(visible);
      // Prose inside the anchor may itself contain URLs.
      scan_text_urls(strip_tags(inner), bare);
      if (close != std::string::npos) i += close;
    }
    const auto trimmed = collapse_space(*href);
    if (auto resolved = resolve_url(base_url, trimmed)) anchors.push_back({*resolved, std::move(text)});
  }
  for (const auto& u : bare) {
    if (auto resolved = resolve_url(base_url, u)) anchors.push_back({*resolved, std::nullopt});
  }
  return anchors;
}

std::optional<MatchRule> match_candidate(const PageLink& link, const CandidateRules& rules) {
  Url url;
  try {
    url = parse_url(link.url);
  } catch (const UrlError&) {
    return std::nullopt;
  }
  const auto pairs = split_query(url.query);
  const auto* service = find_key(pairs, "service");
  const auto* request = find_key(pairs, "request");
  if (value_is(service, "WMS") && value_is(request, "GetCapabilities")) return MatchRule::ExplicitKvp;

  if (link.anchor_text) {
    for (const auto& kw : rules.anchor_keywords) {
      if (!kw.empty() && icontains(*link.anchor_text, kw)) return MatchRule::PrefixFormed;
    }
  }
  std::string_view path = url.path;
  while (path.size() > 1 && path.back() == '/') path.remove_suffix(1);
  for (const auto& suffix : rules.path_suffixes) {
    if (!suffix.empty() && iends_with(path, suffix)) return MatchRule::PrefixFormed;
  }
  if (value_is(service, "WMS") && request == nullptr) return MatchRule::PrefixFormed;
  return std::nullopt;
}

std::vector<CandidateUrl> extract_candidate_urls(std::string_view page, std::string_view base_url,
                                                 const CandidateRules& rules) {
  std::vector<CandidateUrl> out;
  std::set<std::string> seen;
  for (auto& link : extract_links(page, base_url)) {
    const auto rule = match_candidate(link, rules);
    if (!rule) continue;
    std::string key;
    try {
      key = service_key(link.url);
    } catch (const UrlError&) {
      continue;
    }
    if (!seen.insert(key).second) continue;
    out.push_back({std::move(link.url), std::string(base_url), std::move(link.anchor_text), *rule});
  }
  return out;
}

std::string form_getcapabilities_url(std::string_view prefix) {
  parse_url(prefix);  // validates; the text itself is rebuilt verbatim
  auto cut = prefix.find('#');
  const auto without_fragment = prefix.substr(0, cut);
  const auto q = without_fragment.find('?');
  const auto base = without_fragment.substr(0, q);
  auto pairs = split_query(q == std::string_view::npos ? std::string_view{} : without_fragment.substr(q + 1));

  auto enforce = [&pairs](std::string_view key, std::string_view value) {
    bool kept = false;
    std::erase_if(pairs, [&](QueryPair& p) {
      if (!iequals(percent_decode(p.key), key)) return false;
      if (kept) return true;
      kept = true;
      if (!iequals(percent_decode(p.value), value)) {
        p.value = value;
        p.has_equals = true;
      }
      return false;
    });
    if (!kept) pairs.push_back({std::string(key), std::string(value), true});
  };
  enforce("service", "WMS");
  enforce("request", "GetCapabilities");
  return std::string(base) + "?" + join_query(pairs);
}

std::string dedup_key(std::string_view text) {
  const Url url = parse_url(text);
  std::string out = url.scheme + "://" + to_lower(url.host);
  const bool default_port = !url.port || (url.scheme == "http" && *url.port == 80) ||
                            (url.scheme == "https" && *url.port == 443);
  if (!default_port) out += ":" + std::to_string(*url.port);
  out += url.path.empty() ? "/" : normalize_percent_encoding(url.path);

  std::vector<QueryPair> pairs;
  for (auto& p : split_query(url.query)) {
    p.key = normalize_percent_encoding(to_lower(p.key));
    if (p.key == "request" || p.key == "version" || p.key == "wmtver") continue;
    p.value = normalize_percent_encoding(p.value);
    if (p.key == "service") p.value = to_upper(p.value);
    pairs.push_back(std::move(p));
  }
  std::sort(pairs.begin(), pairs.end(), [](const QueryPair& a, const QueryPair& b) {
    return std::tie(a.key, a.value, a.has_equals) < std::tie(b.key, b.value, b.has_equals);
  });
  if (!pairs.empty()) out += "?" + join_query(pairs);
  return out;
}

std::string service_key(std::string_view url) { return dedup_key(form_getcapabilities_url(url)); }

}  // namespace wmsmon
