#include "wmsmon/analytics/keywords.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace wmsmon {

namespace builtin_data {
extern const char* const kStopWords;
extern const char* const kNouns;
}  // namespace builtin_data

std::unordered_set<std::string> parse_word_list(std::string_view text) {
  std::unordered_set<std::string> words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string w = line.substr(first, last - first + 1);
    std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return std::tolower(c); });
    words.insert(std::move(w));
  }
  return words;
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lexicon{parse_word_list(builtin_data::kStopWords), parse_word_list(builtin_data::kNouns)};
  return lexicon;
}

Lexicon Lexicon::load(const std::filesystem::path& stop_words, const std::filesystem::path& nouns) {
  auto read = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw AnalyticsError(AnalyticsErrc::BadInput, "cannot read word list " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return parse_word_list(s.str());
  };
  return {read(stop_words), read(nouns)};
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalpha(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::string noun_of(const std::string& token, const Lexicon& lexicon) {
  if (lexicon.stop_words.count(token)) return {};
  if (lexicon.nouns.count(token)) return token;
  auto ends_with = [&](std::string_view suffix) {
    return token.size() > suffix.size() + 1 && token.ends_with(suffix);
  };
  auto try_base = [&](std::string base) { return lexicon.nouns.count(base) ? base : std::string{}; };
  if (ends_with("ies")) {
    if (auto b = try_base(token.substr(0, token.size() - 3) + "y"); !b.empty()) return b;
  }
  if (ends_with("es")) {
    if (auto b = try_base(token.substr(0, token.size() - 2)); !b.empty()) return b;
  }
  if (ends_with("s") && !token.ends_with("ss")) return try_base(token.substr(0, token.size() - 1));
  return {};
}

std::vector<KeywordCount> keyword_frequency(std::span<const LayerRecord> layers, const Lexicon& lexicon) {
  std::map<std::string, std::size_t> counts;
  for (const auto& layer : layers) {
    std::set<std::string> seen;
    auto scan = [&](std::string_view text) {
      for (const auto& t : tokenize(text)) {
        if (auto n = noun_of(t, lexicon); !n.empty()) seen.insert(std::move(n));
      }
    };
    scan(layer.title);
    scan(layer.abstract_text);
    for (const auto& k : layer.keywords) scan(k);
    for (const auto& n : seen) ++counts[n];
  }
  std::vector<KeywordCount> out;
  out.reserve(counts.size());
  for (auto& [k, n] : counts) out.push_back({k, n});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.count > b.count; });
  return out;
}

}  // namespace wmsmon
