#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wsckit {

// Baseline Penn Treebank tagger: lexicon lookup first, then punctuation,
// number, capitalization and suffix heuristics for unknown words.
// Deterministic for a fixed lexicon file. Immutable after construction and
// safe to share across threads.
class PosTagger {
 public:
  // Lexicon file: "word<TAB>TAG" per line, '#' comments allowed. Entries
  // are case-sensitive first, then matched lowercased. Throws DataError if
  // the file is missing or malformed.
  static PosTagger load(const std::string& path);

  // Uses WSCKIT_DATA_DIR/tagger_lexicon.tsv.
  static PosTagger load_default();

  explicit PosTagger(std::unordered_map<std::string, std::string> lexicon)
      : lexicon_(std::move(lexicon)) {}

  // One tag per word. Throws std::invalid_argument on an empty list.
  std::vector<std::string> tag(const std::vector<std::string>& words) const;

  std::size_t lexicon_size() const { return lexicon_.size(); }

 private:
  std::string tag_word(const std::vector<std::string>& words, std::size_t i,
                       int& open_quotes) const;

  std::unordered_map<std::string, std::string> lexicon_;
};

}  // namespace wsckit
