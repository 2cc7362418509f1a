#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsckit/corpus.h"
#include "wsckit/error.h"
#include "wsckit/example.h"
#include "wsckit/scoring.h"
#include "wsckit/tagger.h"

namespace wsckit {

// Per-example subset flags for a WSC273-style set. A switchable example
// carries the masked sentence with the two parties swapped; the candidate
// list is shared with the original.
struct WscAnnotation {
  std::string example_id;
  bool associative = false;
  bool switchable = false;
  std::optional<std::string> switched_text;
  std::optional<std::size_t> switched_answer_idx;
};

// JSON lines keyed by example_id. Throws DataError when switched_text is
// present without switchable or the other way round.
std::vector<WscAnnotation> read_annotations(const std::string& path);
WscAnnotation annotation_from_json(const nlohmann::json& j);

struct SubsetScore {
  std::size_t total = 0;
  std::size_t correct = 0;

  std::optional<double> accuracy() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(total);
  }
};

// kFlip: the predicted party changes between the unswitched and switched
// variants. kFlipAndCorrect additionally requires both predictions correct.
enum class ConsistencyRule { kFlip, kFlipAndCorrect };

struct MetricsReport {
  SubsetScore overall;
  SubsetScore non_associative;
  SubsetScore associative;
  SubsetScore unswitched;
  SubsetScore switched;
  std::size_t consistency_pairs = 0;
  std::size_t consistent = 0;
  std::optional<double> wnli_accuracy;

  std::optional<double> consistency() const {
    if (consistency_pairs == 0) return std::nullopt;
    return static_cast<double>(consistent) / static_cast<double>(consistency_pairs);
  }
  nlohmann::ordered_json to_json() const;
};

struct WscOutcome {
  std::string example_id;
  bool associative = false;
  std::size_t predicted = 0;
  bool correct = false;
  // Set for switchable examples.
  std::optional<std::string> predicted_party;
  std::optional<std::string> switched_party;
  std::optional<bool> switched_correct;
};

struct EvalOptions {
  std::optional<std::uint64_t> shuffle_seed = 0;
  ConsistencyRule consistency_rule = ConsistencyRule::kFlip;
};

// Fraction of aligned pairs whose predicted party differs. Parties are
// compared after match normalization. Throws std::invalid_argument on a
// length mismatch; 0 for empty input.
double consistency(std::span<const std::string> preds_unswitched,
                   std::span<const std::string> preds_switched);
double consistency(std::span<const std::string> preds_unswitched,
                   std::span<const std::string> preds_switched,
                   const std::vector<bool>& correct_unswitched,
                   const std::vector<bool>& correct_switched, ConsistencyRule rule);

// Pure fold over per-example outcomes, in order.
MetricsReport aggregate_wsc(std::span<const WscOutcome> outcomes, ConsistencyRule rule);

// Throws DataError naming the first example without an annotation.
MetricsReport evaluate_wsc(Scorer& scorer, const Vocab& vocab,
                           std::span<const MaskedExample> examples,
                           std::span<const WscAnnotation> annotations,
                           const EvalOptions& options = {},
                           std::vector<WscOutcome>* outcomes = nullptr);

// --- WNLI -------------------------------------------------------------

class WnliAlignmentError : public DataError {
 public:
  enum class Kind { kNoAlignment, kAmbiguous };
  WnliAlignmentError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct WnliAlignment {
  MaskedExample example;  // answer_idx 0 is the hypothesis candidate
  std::string pronoun;
  // Byte range of the aligned premise window inside example.masked_text.
  std::size_t window_begin = 0;
  std::size_t window_end = 0;
};

// Turns a premise/hypothesis pair into a masked example by finding the
// premise window that becomes the hypothesis when one pronoun is replaced
// by a candidate. The other nouns of the premise become distractors.
class WnliTransformer {
 public:
  WnliTransformer(const PosTagger& tagger, AbbreviationSet abbreviations = {})
      : tagger_(tagger), abbreviations_(std::move(abbreviations)) {}

  // Throws WnliAlignmentError when no alignment or more than one exists.
  WnliAlignment transform(std::string_view premise, std::string_view hypothesis,
                          std::string id = "wnli") const;

 private:
  const PosTagger& tagger_;
  AbbreviationSet abbreviations_;
};

// Case-insensitive, whitespace-collapsed, one trailing . ! ? removed.
std::string wnli_normalize(std::string_view text);

// Filling the window with the answer reproduces the hypothesis up to
// wnli_normalize and tokenization.
bool wnli_round_trips(const WnliAlignment& alignment, std::string_view hypothesis,
                      const AbbreviationSet& abbreviations = {});

struct WnliRow {
  std::string index;
  std::string premise;
  std::string hypothesis;
  int label = 0;
};

// GLUE layout: header row, then index<TAB>sentence1<TAB>sentence2<TAB>label.
// Throws DataError with the line number for malformed rows.
std::vector<WnliRow> read_wnli_tsv(const std::string& path);

struct WnliOptions {
  bool unalignable_counts_incorrect = true;
  std::optional<std::uint64_t> shuffle_seed = 0;
};

struct WnliSkip {
  std::string index;
  std::string reason;
};

struct WnliResult {
  std::size_t total = 0;
  std::size_t correct = 0;
  std::vector<WnliSkip> skipped;
  std::vector<std::string> single_candidate;  // indices of rows with no distractor
  double accuracy = 0.0;

  nlohmann::ordered_json to_json() const;
};

WnliResult evaluate_wnli(Scorer& scorer, const Vocab& vocab, const WnliTransformer& transformer,
                         std::span<const WnliRow> rows, const WnliOptions& options = {});

// --- Reports ------------------------------------------------------------

inline constexpr std::array<std::string_view, 7> kReportColumns = {
    "WSC273", "non-assoc.", "assoc.", "unswitched", "switched", "consist.", "WNLI"};

struct ReportRow {
  std::string label;
  std::array<std::optional<double>, 7> values;
};

ReportRow to_row(const MetricsReport& report, std::string label);

// Fixed column order, three decimals, "--" for missing values.
std::string render_table(std::span<const ReportRow> rows);
std::string render_report(const MetricsReport& report, const std::string& label = "model");

}  // namespace wsckit
