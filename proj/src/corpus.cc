#include "wsckit/corpus.h"

#include <algorithm>
#include <array>
#include <string>

#include "wsckit/error.h"
#include "wsckit/text.h"

namespace wsckit {

namespace {

constexpr std::array<std::string_view, 6> kApostropheClitics = {"'s", "'re", "'ve",
                                                                "'ll", "'d", "'m"};

bool is_clitic(std::string_view word) {
  const std::string lower = to_lower_ascii(word);
  if (lower == "n't") return true;
  return std::find(kApostropheClitics.begin(), kApostropheClitics.end(), lower) !=
         kApostropheClitics.end();
}

bool is_space_char(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_leading_punct(char c) {
  return c == '"' || c == '\'' || c == '(' || c == '[' || c == '{' || c == '`';
}

bool is_trailing_punct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case ')': case ']': case '}': case '"': case '\'':
      return true;
    default:
      return false;
  }
}

bool is_abbreviation(std::string_view word, const AbbreviationSet& abbreviations) {
  if (abbreviations.empty()) return false;
  return abbreviations.count(std::string(word)) > 0;
}

// Splits one whitespace-free chunk into tokens.
void tokenize_chunk(std::string_view text, std::size_t base,
                    const AbbreviationSet& abbreviations, std::vector<Token>& out) {
  std::size_t b = 0;
  std::size_t e = text.size();
  auto emit = [&](std::size_t from, std::size_t to) {
    out.push_back(Token{std::string(text.substr(from, to - from)), base + from, base + to});
  };

  if (is_clitic(text) || is_abbreviation(text, abbreviations)) {
    emit(b, e);
    return;
  }

  // Leading quotes and brackets.
  while (b < e && is_leading_punct(text[b])) {
    if (is_clitic(text.substr(b, e - b))) break;
    if (text[b] == '`' && b + 1 < e && text[b + 1] == '`') {
      emit(b, b + 2);
      b += 2;
    } else {
      emit(b, b + 1);
      ++b;
    }
  }

  // Trailing punctuation, collected right to left.
  std::vector<std::pair<std::size_t, std::size_t>> trailing;
  while (e > b) {
    const std::string_view rest = text.substr(b, e - b);
    if (is_abbreviation(rest, abbreviations) || is_clitic(rest)) break;
    if (rest.size() >= 3 && rest.substr(rest.size() - 3) == "...") {
      trailing.emplace_back(e - 3, e);
      e -= 3;
      continue;
    }
    if (rest.size() >= 2 && rest.substr(rest.size() - 2) == "''") {
      trailing.emplace_back(e - 2, e);
      e -= 2;
      continue;
    }
    if (!is_trailing_punct(text[e - 1])) break;
    // An apostrophe glued to a clitic ("'s" itself) is handled below.
    if (text[e - 1] == '\'' && rest.size() == 1) break;
    trailing.emplace_back(e - 1, e);
    --e;
  }

  if (e > b) {
    const std::string lower = to_lower_ascii(text.substr(b, e - b));
    std::size_t split = e;
    if (lower.size() > 3 && lower.ends_with("n't")) {
      split = e - 3;
    } else {
      for (std::string_view clitic : kApostropheClitics) {
        if (lower.size() > clitic.size() && lower.ends_with(clitic)) {
          split = e - clitic.size();
          break;
        }
      }
    }
    emit(b, split);
    if (split < e) emit(split, e);
  }
  for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) emit(it->first, it->second);
}

bool no_space_before(std::string_view w) {
  static const std::array<std::string_view, 13> kTokens = {
      ".", ",", ";", ":", "!", "?", "%", ")", "]", "}", "''", "...", "'"};
  if (std::find(kTokens.begin(), kTokens.end(), w) != kTokens.end()) return true;
  return is_clitic(w);
}

bool no_space_after(std::string_view w) {
  return w == "(" || w == "[" || w == "{" || w == "``" || w == "$" || w == "#";
}

}  // namespace

AbbreviationSet load_abbreviations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read abbreviation list " + path);
  AbbreviationSet out;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.emplace(t);
  }
  return out;
}

std::vector<Token> tokenize_words(std::string_view sentence,
                                  const AbbreviationSet& abbreviations) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && is_space_char(sentence[i])) ++i;
    std::size_t j = i;
    while (j < sentence.size() && !is_space_char(sentence[j])) ++j;
    if (j > i) tokenize_chunk(sentence.substr(i, j - i), i, abbreviations, out);
    i = j;
  }
  return out;
}

std::string detokenize(const std::vector<std::string>& words) {
  std::string out;
  bool suppress_next_space = true;
  int double_quotes = 0;
  for (const std::string& w : words) {
    bool glue_left = no_space_before(w);
    bool glue_right = no_space_after(w);
    if (w == "\"") {
      // Alternate opening and closing.
      const bool opening = (double_quotes % 2) == 0;
      ++double_quotes;
      glue_left = !opening;
      glue_right = opening;
    }
    if (!suppress_next_space && !glue_left) out.push_back(' ');
    out += (w == "``" || w == "''") ? "\"" : w;
    suppress_next_space = glue_right;
  }
  return out;
}

std::vector<std::string> SentenceSegmenter::segment(std::string_view text) const {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto push = [&](std::size_t from, std::size_t to) {
    std::string_view s = trim(text.substr(from, to - from));
    if (!s.empty()) out.emplace_back(s);
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
    while (j < text.size() &&
           (text[j] == '"' || text[j] == '\'' || text[j] == ')' || text[j] == ']')) {
      ++j;
    }
    if (j >= text.size() || !is_space_char(text[j])) continue;
    std::size_t k = j;
    while (k < text.size() && is_space_char(text[k])) ++k;
    if (k >= text.size()) continue;
    const char next = text[k];
    if (!is_ascii_upper(next) && next != '"' && next != '`' && next != '\'' && next != '(') {
      continue;
    }
    if (c == '.') {
      std::size_t w = i;
      while (w > start && !is_space_char(text[w - 1])) --w;
      std::string_view word = text.substr(w, i + 1 - w);
      while (!word.empty() && is_leading_punct(word.front())) word.remove_prefix(1);
      if (abbreviations_.count(std::string(word)) > 0) continue;
    }
    push(start, j);
    start = j;
    i = j - 1;
  }
  push(start, text.size());
  return out;
}

std::vector<SentenceRecord> process_document(std::string_view doc_id, std::string_view text,
                                             const PosTagger& tagger,
                                             const SentenceSegmenter& segmenter) {
  std::vector<SentenceRecord> out;
  for (std::string& sentence : segmenter.segment(text)) {
    std::vector<Token> tokens = tokenize_words(sentence, segmenter.abbreviations());
    if (tokens.empty()) continue;
    SentenceRecord rec;
    rec.doc_id = std::string(doc_id);
    rec.sent_idx = out.size();
    rec.words.reserve(tokens.size());
    for (Token& t : tokens) rec.words.push_back(std::move(t.text));
    rec.pos_tags = tagger.tag(rec.words);
    rec.raw_text = std::move(sentence);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<SentenceRecord> process_documents_serial(const std::vector<std::string>& doc_ids,
                                                     const std::vector<std::string>& texts,
                                                     const PosTagger& tagger,
                                                     const SentenceSegmenter& segmenter) {
  std::vector<SentenceRecord> out;
  for (std::size_t d = 0; d < texts.size(); ++d) {
    for (SentenceRecord& r : process_document(doc_ids[d], texts[d], tagger, segmenter)) {
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<SentenceRecord> process_documents(const std::vector<std::string>& doc_ids,
                                              const std::vector<std::string>& texts,
                                              const PosTagger& tagger,
                                              const SentenceSegmenter& segmenter) {
  const auto n = static_cast<std::ptrdiff_t>(texts.size());
  std::vector<std::vector<SentenceRecord>> per_doc(texts.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t d = 0; d < n; ++d) {
    per_doc[d] = process_document(doc_ids[d], texts[d], tagger, segmenter);
  }
  std::vector<SentenceRecord> out;
  for (auto& recs : per_doc) {
    for (SentenceRecord& r : recs) out.push_back(std::move(r));
  }
  return out;
}

CorpusReader::CorpusReader(const std::string& path, CorpusFormat format,
                           const PosTagger* tagger, const SentenceSegmenter* segmenter)
    : in_(path), format_(format), tagger_(tagger), segmenter_(segmenter) {
  if (!in_) throw DataError("cannot read corpus " + path);
  if (format_ == CorpusFormat::kPlain && (tagger_ == nullptr || segmenter_ == nullptr)) {
    throw std::invalid_argument("plain corpus requires a tagger and a segmenter");
  }
}

std::optional<SentenceRecord> CorpusReader::next() {
  return format_ == CorpusFormat::kPretagged ? next_pretagged() : next_plain();
}

std::optional<SentenceRecord> CorpusReader::next_plain() {
  constexpr std::size_t kBatch = 512;
  while (pending_pos_ >= pending_.size()) {
    pending_.clear();
    pending_pos_ = 0;
    std::vector<std::string> ids;
    std::vector<std::string> texts;
    std::string line;
    while (texts.size() < kBatch && std::getline(in_, line)) {
      ++line_no_;
      ids.push_back(std::to_string(line_no_));
      texts.push_back(std::move(line));
    }
    if (texts.empty()) return std::nullopt;
    pending_ = process_documents(ids, texts, *tagger_, *segmenter_);
  }
  return std::move(pending_[pending_pos_++]);
}

std::optional<SentenceRecord> CorpusReader::next_pretagged() {
  SentenceRecord rec;
  bool bad = false;
  std::size_t block_start = 0;
  std::string line;

  // Closes the current block. Returns true when a record is ready.
  auto finish_block = [&]() -> bool {
    if (rec.words.empty() && !bad) return false;
    const bool emit = !bad;
    if (emit) {
      rec.doc_id = doc_id_;
      rec.sent_idx = sent_idx_;
      rec.raw_text = detokenize(rec.words);
    }
    ++sent_idx_;
    bad = false;
    return emit;
  };

  while (std::getline(in_, line)) {
    ++line_no_;
    std::string_view t = trim(line);
    if (t.empty()) {
      if (finish_block()) return rec;
      rec = SentenceRecord{};
      continue;
    }
    if (t.starts_with("# doc")) {
      const bool ready = finish_block();
      std::string_view id = trim(t.substr(5));
      std::string next_doc = id.empty() ? std::to_string(line_no_) : std::string(id);
      if (ready) {
        doc_id_ = std::move(next_doc);
        sent_idx_ = 0;
        return rec;
      }
      rec = SentenceRecord{};
      doc_id_ = std::move(next_doc);
      sent_idx_ = 0;
      continue;
    }
    if (rec.words.empty() && !bad) block_start = line_no_;
    if (bad) continue;
    for (const std::string& field : split_whitespace(t)) {
      const std::size_t slash = field.rfind('/');
      if (slash == std::string::npos || slash == 0 || slash + 1 == field.size()) {
        issues_.push_back({line_no_, "malformed token '" + field +
                                         "' (expected word/TAG) in sentence starting at line " +
                                         std::to_string(block_start)});
        bad = true;
        rec.words.clear();
        rec.pos_tags.clear();
        break;
      }
      rec.words.push_back(field.substr(0, slash));
      rec.pos_tags.push_back(field.substr(slash + 1));
    }
  }
  if (finish_block()) return rec;
  return std::nullopt;
}

std::vector<SentenceRecord> load_corpus(const std::string& path, CorpusFormat format,
                                        const PosTagger* tagger,
                                        const SentenceSegmenter* segmenter,
                                        std::vector<CorpusIssue>* issues) {
  CorpusReader reader(path, format, tagger, segmenter);
  std::vector<SentenceRecord> out;
  while (auto rec = reader.next()) out.push_back(std::move(*rec));
  if (issues != nullptr) {
    issues->insert(issues->end(), reader.issues().begin(), reader.issues().end());
  }
  return out;
}

bool is_noun_tag(std::string_view tag) {
  return tag == "NN" || tag == "NNS" || tag == "NNP" || tag == "NNPS";
}

std::vector<std::size_t> noun_positions(const SentenceRecord& record) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < record.pos_tags.size(); ++i) {
    if (is_noun_tag(record.pos_tags[i])) out.push_back(i);
  }
  return out;
}

}  // namespace wsckit
