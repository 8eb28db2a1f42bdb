#pragma once

// Naive tag scanner used as an independent oracle for layer counts. It does
// not use an XML parser: it walks '<...>' tokens, tracks the element stack by
// local name and marks a Layer as named when a direct <Name> child carries
// non-blank text.

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace wmsmon::testing {

struct TagScanCounts {
  int layers = 0;
  int named_layers = 0;
};

inline TagScanCounts naive_layer_scan(std::string_view xml) {
  struct Open {
    std::string name;
    int layer_index;  // index into named flags when name == "Layer"
  };
  std::vector<Open> stack;
  std::vector<bool> named;
  std::size_t i = 0;
  while ((i = xml.find('<', i)) != std::string_view::npos) {
    if (xml.substr(i, 4) == "<!--") {
      const auto end = xml.find("-->", i);
      i = end == std::string_view::npos ? xml.size() : end + 3;
      continue;
    }
    const auto close = xml.find('>', i);
    if (close == std::string_view::npos) break;
    std::string_view tag = xml.substr(i + 1, close - i - 1);
    const std::size_t after = close + 1;
    i = after;
    if (tag.empty() || tag[0] == '?' || tag[0] == '!') continue;
    const bool closing = tag[0] == '/';
    const bool self_closing = tag.back() == '/';
    if (closing) tag.remove_prefix(1);
    std::size_t n = 0;
    while (n < tag.size() && !std::isspace(static_cast<unsigned char>(tag[n])) && tag[n] != '/') ++n;
    std::string name(tag.substr(0, n));
    if (const auto colon = name.rfind(':'); colon != std::string::npos) name = name.substr(colon + 1);
    if (closing) {
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    if (name == "Name" && !self_closing && !stack.empty() && stack.back().name == "Layer") {
      const auto text_end = xml.find('<', after);
      const auto text = xml.substr(after, text_end - after);
      bool blank = true;
      for (char c : text) blank = blank && std::isspace(static_cast<unsigned char>(c));
      if (!blank) named[static_cast<std::size_t>(stack.back().layer_index)] = true;
    }
    int layer_index = -1;
    if (name == "Layer") {
      layer_index = static_cast<int>(named.size());
      named.push_back(false);
    }
    if (!self_closing) stack.push_back({name, layer_index});
  }
  TagScanCounts counts;
  counts.layers = static_cast<int>(named.size());
  for (bool b : named) counts.named_layers += b ? 1 : 0;
  return counts;
}

}  // namespace wmsmon::testing
