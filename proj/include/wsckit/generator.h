#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsckit/corpus.h"
#include "wsckit/example.h"

namespace wsckit {

// Mines masked examples from one tagged sentence. For every noun (matched
// case-insensitively) that occurs at least twice, the second occurrence is
// masked; the correct candidate is the first occurrence's surface form and
// the distractors are the other distinct nouns of the sentence in sentence
// order. Examples without distractors are dropped. Output is ordered by the
// masked position.
std::vector<MaskedExample> generate_examples(const SentenceRecord& record);

// Batch kernels; results are in record order for any thread count.
std::vector<MaskedExample> generate_all(std::span<const SentenceRecord> records);
std::vector<MaskedExample> generate_all_serial(std::span<const SentenceRecord> records);

// Text the generated examples of `record` are rendered from.
std::string source_text(const SentenceRecord& record);

// True when filling the mask with the answer reproduces `source`: exact
// outside the slot, case-insensitive inside it (the answer keeps the first
// occurrence's casing).
bool round_trips(const MaskedExample& ex, std::string_view source);

// Bernoulli thinning keyed on (seed, id): keep iff hash / 2^64 < rate.
bool keep_in_sample(std::string_view id, double rate, std::uint64_t seed);

std::vector<char> downsample_mask(std::span<const MaskedExample> examples, double rate,
                                  std::uint64_t seed);
std::vector<char> downsample_mask_serial(std::span<const MaskedExample> examples, double rate,
                                         std::uint64_t seed);

// Order-preserving. Throws std::invalid_argument unless 0 < rate <= 1.
std::vector<MaskedExample> downsample(std::span<const MaskedExample> examples, double rate,
                                      std::uint64_t seed);

enum class PairSplitMode {
  kNoPairs,    // one seeded member of every pair
  kHalfPairs,  // both members of a seeded half of the pairs
};

// Throws DataError listing every pair_id that does not have exactly two
// members (and every example without a pair_id). Output keeps input order.
std::vector<MaskedExample> split_pairs(std::span<const MaskedExample> dataset,
                                       PairSplitMode mode, std::uint64_t seed);

struct OverlapResult {
  std::vector<MaskedExample> kept;
  std::vector<std::string> removed_ids;
};

// Drops training examples whose normalized masked text and candidate set
// both match some evaluation example.
OverlapResult remove_overlap(std::span<const MaskedExample> train,
                             std::span<const MaskedExample> eval);

}  // namespace wsckit
