#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wsckit/example.h"
#include "wsckit/scoring.h"
#include "wsckit/wordpiece.h"

namespace wsckit {

// How an example with several distractors is reduced to pairwise checks.
enum class PairRule { kAllPairs, kAnyPair };

// Which text the whole-word constraint is measured on.
enum class WholeWordScope {
  kSentence,    // the masked sentence with the correct answer filled in
  kCandidates,  // the candidate strings only
};

// Difficulty band on v = log P(incorrect|s) - log P(correct|s), inclusive at
// both ends, plus a minimum whole-word fraction.
struct FilterConfig {
  double v_min = -0.075;
  double v_max = 0.30;
  double min_whole_word_frac = 0.90;
  PairRule pair_rule = PairRule::kAllPairs;
  WholeWordScope whole_word_scope = WholeWordScope::kSentence;
  WholeWordDenominator denominator = WholeWordDenominator::kPieces;

  // Throws std::invalid_argument when v_min > v_max or the fraction is
  // outside [0, 1].
  void validate() const;
  nlohmann::ordered_json to_json() const;
};

// avg log P(incorrect) - avg log P(correct). Requires exactly two
// candidates; throws std::invalid_argument otherwise.
double v_score(Scorer& scorer, const Vocab& vocab, const MaskedExample& example);

bool passes_filter(double v, double whole_word_frac, const FilterConfig& cfg);

double example_whole_word_fraction(const Vocab& vocab, const MaskedExample& example,
                                   const FilterConfig& cfg);

enum class FilterOutcome { kKept, kRejected, kErrored };

struct FilterDecision {
  FilterOutcome outcome = FilterOutcome::kRejected;
  std::vector<double> v;  // one per distractor
  double whole_word_frac = 0.0;
  std::string error;
};

struct FilterStats {
  std::size_t total = 0;
  std::size_t kept = 0;
  std::size_t rejected = 0;
  std::size_t errored = 0;
  std::string scorer_digest;
  FilterConfig config;

  double keep_rate() const {
    return total == 0 ? 0.0 : static_cast<double>(kept) / static_cast<double>(total);
  }
  nlohmann::ordered_json to_json() const;
};

struct FilterResult {
  std::vector<MaskedExample> kept;
  std::vector<FilterDecision> decisions;  // one per input example
  FilterStats stats;
};

// Scores examples in batches. A failing example is counted as errored and
// never kept.
FilterResult filter_dataset(Scorer& scorer, const Vocab& vocab,
                            std::span<const MaskedExample> dataset, const FilterConfig& cfg,
                            std::size_t batch_size = 1024);

enum class QualityCategory { kUnsolvable, kHard, kEasy, kNoise };

std::string_view category_name(QualityCategory c);
// Throws DataError for an unknown name.
QualityCategory parse_category(std::string_view name);

struct QualityTally {
  std::array<std::size_t, 4> counts{};
  std::size_t sample_size = 0;

  std::size_t count(QualityCategory c) const { return counts[static_cast<int>(c)]; }
  // 0..100; 0 for an empty tally.
  double percent(QualityCategory c) const;
  nlohmann::ordered_json to_json() const;
};

// Seeded uniform sample of n examples without replacement, in dataset
// order. Throws std::invalid_argument when n exceeds the dataset size.
std::vector<MaskedExample> audit_sample(std::span<const MaskedExample> dataset, std::size_t n,
                                        std::uint64_t seed);

QualityTally tally_labels(std::span<const std::string> labels);

// Labels file: "example_id<TAB>category" per line.
QualityTally tally_audit(const std::string& labels_path);

}  // namespace wsckit
