#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "wsckit/tagger.h"

namespace wsckit {

// A segmented, word-tokenized, POS-tagged sentence with provenance.
// words.size() == pos_tags.size() > 0.
struct SentenceRecord {
  std::string doc_id;
  std::size_t sent_idx = 0;
  std::vector<std::string> words;
  std::vector<std::string> pos_tags;
  std::string raw_text;

  bool operator==(const SentenceRecord&) const = default;
};

enum class CorpusFormat { kPlain, kPretagged };

// A word with its byte span in the source sentence.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

using AbbreviationSet = std::unordered_set<std::string>;

// One abbreviation per line ("Mr.", "e.g."). Blank lines and '#' comments
// are skipped.
AbbreviationSet load_abbreviations(const std::string& path);

// Penn-Treebank-style word splitting: punctuation peeled off word edges,
// clitics ('s, 're, n't, ...) split, hyphenated words kept whole.
// Abbreviations keep their trailing period.
std::vector<Token> tokenize_words(std::string_view sentence,
                                  const AbbreviationSet& abbreviations = {});

// Joins words with single spaces, except no space before closing
// punctuation and clitics and none after opening brackets and quotes.
std::string detokenize(const std::vector<std::string>& words);

// Rule-based sentence splitter: a boundary is one of . ! ? (optionally
// followed by closing quotes or brackets), then whitespace, then an
// uppercase letter or an opening quote. A period ending a listed
// abbreviation is never a boundary.
class SentenceSegmenter {
 public:
  SentenceSegmenter() = default;
  explicit SentenceSegmenter(AbbreviationSet abbreviations)
      : abbreviations_(std::move(abbreviations)) {}

  std::vector<std::string> segment(std::string_view text) const;
  const AbbreviationSet& abbreviations() const { return abbreviations_; }

 private:
  AbbreviationSet abbreviations_;
};

// A record-level problem found while reading. Reading continues after it.
struct CorpusIssue {
  std::size_t line = 0;
  std::string message;
};

// Streams SentenceRecords from a corpus file in file order.
//
// Plain format: one document per line, doc_id is the 1-based line number.
// Pretagged format: "word/TAG" fields separated by spaces, a blank line
// ends a sentence, "# doc <id>" starts a new document (sentences before
// the first header belong to document "0").
class CorpusReader {
 public:
  // `tagger` and `segmenter` are only used for the plain format and must
  // outlive the reader.
  CorpusReader(const std::string& path, CorpusFormat format,
               const PosTagger* tagger = nullptr,
               const SentenceSegmenter* segmenter = nullptr);

  std::optional<SentenceRecord> next();
  const std::vector<CorpusIssue>& issues() const { return issues_; }

 private:
  std::optional<SentenceRecord> next_pretagged();
  std::optional<SentenceRecord> next_plain();

  std::ifstream in_;
  CorpusFormat format_;
  const PosTagger* tagger_;
  const SentenceSegmenter* segmenter_;
  std::size_t line_no_ = 0;
  std::string doc_id_ = "0";
  std::size_t sent_idx_ = 0;
  std::vector<SentenceRecord> pending_;
  std::size_t pending_pos_ = 0;
  std::vector<CorpusIssue> issues_;
};

// Reads a whole corpus. Issues are appended to `issues` when given.
std::vector<SentenceRecord> load_corpus(const std::string& path, CorpusFormat format,
                                        const PosTagger* tagger = nullptr,
                                        const SentenceSegmenter* segmenter = nullptr,
                                        std::vector<CorpusIssue>* issues = nullptr);

// Segments, tokenizes and tags a single plain document.
std::vector<SentenceRecord> process_document(std::string_view doc_id, std::string_view text,
                                             const PosTagger& tagger,
                                             const SentenceSegmenter& segmenter);

// Batch kernels over independent documents. Output order is document
// order regardless of thread count.
std::vector<SentenceRecord> process_documents(const std::vector<std::string>& doc_ids,
                                              const std::vector<std::string>& texts,
                                              const PosTagger& tagger,
                                              const SentenceSegmenter& segmenter);
std::vector<SentenceRecord> process_documents_serial(const std::vector<std::string>& doc_ids,
                                                     const std::vector<std::string>& texts,
                                                     const PosTagger& tagger,
                                                     const SentenceSegmenter& segmenter);

bool is_noun_tag(std::string_view tag);

// Ascending indices whose tag is one of NN, NNS, NNP, NNPS.
std::vector<std::size_t> noun_positions(const SentenceRecord& record);

}  // namespace wsckit
