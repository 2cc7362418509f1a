#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wsckit {

inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kContinuationPrefix = "##";

// WordPiece vocabulary. Line number in the vocab file is the piece id.
// Immutable after load.
class Vocab {
 public:
  // Throws DataError on a missing file, an empty piece, a duplicate piece,
  // or a missing special token.
  static Vocab load(const std::string& path);
  static Vocab from_pieces(std::vector<std::string> pieces);

  std::size_t size() const { return pieces_.size(); }
  const std::string& piece(std::size_t id) const { return pieces_[id]; }
  const std::vector<std::string>& pieces() const { return pieces_; }
  std::optional<std::size_t> id(std::string_view piece) const;
  bool contains(std::string_view piece) const { return id(piece).has_value(); }

  static bool is_special(std::string_view piece);

  // SHA-256 hex of the pieces, each followed by '\n', in id order.
  const std::string& digest() const { return digest_; }

 private:
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, std::size_t> ids_;
  std::string digest_;
};

// BERT-style pre-tokenization: whitespace split, every ASCII punctuation
// character becomes its own word, bracketed special tokens ("[MASK]") stay
// intact.
std::vector<std::string> basic_tokenize(std::string_view text);

// Greedy longest-match-first decomposition of one lowercased word. Pieces
// after the first carry "##". Returns {"[UNK]"} when no decomposition
// exists. Special tokens map to themselves.
std::vector<std::string> tokenize_word(const Vocab& vocab, std::string_view word);

// basic_tokenize followed by tokenize_word on every word.
std::vector<std::string> tokenize_text(const Vocab& vocab, std::string_view text);

enum class WholeWordDenominator {
  kPieces,  // whole words / total pieces
  kWords,   // whole words / total words
};

// Share of the text that is represented by whole-word pieces. A word counts
// as whole when it tokenizes to exactly one piece that is not [UNK].
// Throws std::invalid_argument on text with no words.
double whole_word_fraction(const Vocab& vocab, std::string_view text,
                           WholeWordDenominator denominator = WholeWordDenominator::kPieces);

}  // namespace wsckit
