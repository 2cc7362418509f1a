#include "wsckit/wordpiece.h"

#include <array>
#include <fstream>
#include <stdexcept>

#include "wsckit/error.h"
#include "wsckit/hash.h"
#include "wsckit/text.h"

namespace wsckit {

namespace {

constexpr std::array<std::string_view, 4> kRequiredSpecials = {kMaskToken, kUnkToken,
                                                               kClsToken, kSepToken};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

}  // namespace

Vocab Vocab::from_pieces(std::vector<std::string> pieces) {
  Vocab v;
  std::string canonical;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i].empty()) throw DataError("empty vocab piece", i + 1);
    if (!v.ids_.emplace(pieces[i], i).second) {
      throw DataError("duplicate vocab piece '" + pieces[i] + "'", i + 1);
    }
    canonical += pieces[i];
    canonical.push_back('\n');
  }
  for (std::string_view s : kRequiredSpecials) {
    if (!v.ids_.count(std::string(s))) {
      throw DataError("vocab is missing special token " + std::string(s));
    }
  }
  v.pieces_ = std::move(pieces);
  v.digest_ = sha256_hex(canonical);
  return v;
}

Vocab Vocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read vocab " + path);
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && is_space(line.back())) line.pop_back();
    pieces.push_back(line);
  }
  return from_pieces(std::move(pieces));
}

std::optional<std::size_t> Vocab::id(std::string_view piece) const {
  auto it = ids_.find(std::string(piece));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

bool Vocab::is_special(std::string_view piece) {
  return piece.size() >= 3 && piece.front() == '[' && piece.back() == ']' &&
         piece.find(' ') == std::string_view::npos;
}

std::vector<std::string> basic_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const char c = text[i];
    if (is_space(c)) {
      flush();
      ++i;
      continue;
    }
    if (c == '[') {
      const std::size_t close = text.find(']', i);
      if (close != std::string_view::npos &&
          Vocab::is_special(text.substr(i, close - i + 1))) {
        flush();
        out.emplace_back(text.substr(i, close - i + 1));
        i = close + 1;
        continue;
      }
    }
    if (is_ascii_punct(c)) {
      flush();
      out.emplace_back(1, c);
      ++i;
      continue;
    }
    current.push_back(c);
    ++i;
  }
  flush();
  return out;
}

std::vector<std::string> tokenize_word(const Vocab& vocab, std::string_view word) {
  if (Vocab::is_special(word) && vocab.contains(word)) return {std::string(word)};
  const std::string lower = to_lower_ascii(word);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < lower.size()) {
    std::size_t end = lower.size();
    std::string match;
    while (end > start) {
      if (is_utf8_boundary(end < lower.size() ? lower[end] : '\0')) {
        std::string candidate = lower.substr(start, end - start);
        if (start > 0) candidate.insert(0, kContinuationPrefix);
        if (vocab.contains(candidate)) {
          match = std::move(candidate);
          break;
        }
      }
      --end;
    }
    if (match.empty()) return {std::string(kUnkToken)};
    out.push_back(std::move(match));
    start = end;
  }
  if (out.empty()) return {std::string(kUnkToken)};
  return out;
}

std::vector<std::string> tokenize_text(const Vocab& vocab, std::string_view text) {
  std::vector<std::string> out;
  for (const std::string& w : basic_tokenize(text)) {
    for (std::string& p : tokenize_word(vocab, w)) out.push_back(std::move(p));
  }
  return out;
}

double whole_word_fraction(const Vocab& vocab, std::string_view text,
                           WholeWordDenominator denominator) {
  const std::vector<std::string> words = basic_tokenize(text);
  if (words.empty()) throw std::invalid_argument("whole_word_fraction: empty text");
  std::size_t whole = 0;
  std::size_t pieces = 0;
  for (const std::string& w : words) {
    const std::vector<std::string> p = tokenize_word(vocab, w);
    pieces += p.size();
    if (p.size() == 1 && p.front() != kUnkToken) ++whole;
  }
  const std::size_t denom = denominator == WholeWordDenominator::kPieces ? pieces : words.size();
  return static_cast<double>(whole) / static_cast<double>(denom);
}

}  // namespace wsckit
