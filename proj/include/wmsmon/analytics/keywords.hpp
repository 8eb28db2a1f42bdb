#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "wmsmon/analytics/error.hpp"
#include "wmsmon/model/types.hpp"

namespace wmsmon {

/// Stop words and the noun lexicon used to keep only nouns.
struct Lexicon {
  std::unordered_set<std::string> stop_words;
  std::unordered_set<std::string> nouns;

  /// Word lists compiled from data/stopwords.txt and data/nouns.txt.
  static const Lexicon& builtin();
  /// Lists in the same format: one word per line, '#' comments.
  static Lexicon load(const std::filesystem::path& stop_words, const std::filesystem::path& nouns);
};

std::unordered_set<std::string> parse_word_list(std::string_view text);

/// Lowercased ASCII-letter runs of `text`.
std::vector<std::string> tokenize(std::string_view text);

/// The lexicon noun a token stands for, folding regular plurals; empty when
/// the token is a stop word or not a noun.
std::string noun_of(const std::string& token, const Lexicon& lexicon);

struct KeywordCount {
  std::string keyword;
  std::size_t count = 0;  // layers containing the keyword

  friend bool operator==(const KeywordCount&, const KeywordCount&) = default;
};

/// Nouns drawn from each layer's title, abstract and keywords, counted once
/// per layer; sorted by count descending, then alphabetically.
std::vector<KeywordCount> keyword_frequency(std::span<const LayerRecord> layers,
                                            const Lexicon& lexicon = Lexicon::builtin());

}  // namespace wmsmon
