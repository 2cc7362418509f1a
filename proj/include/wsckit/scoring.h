#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsckit/corpus.h"
#include "wsckit/example.h"
#include "wsckit/wordpiece.h"

namespace wsckit {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// One masked-token query. `pieces` already has every mask slot expanded;
// targets[i] is the piece whose log-probability is wanted at
// mask_positions[i].
struct ScorerRequest {
  std::string id;
  std::vector<std::string> pieces;
  std::vector<std::size_t> mask_positions;
  std::vector<std::string> targets;

  bool operator==(const ScorerRequest&) const = default;
};

// Natural-log probabilities, one per mask position; -inf for impossible
// pieces.
struct ScorerResponse {
  std::string id;
  std::vector<double> log_probs;

  bool operator==(const ScorerResponse&) const = default;
};

// A masked-token probability provider. Implementations either accept
// concurrent calls or serialize them internally.
class Scorer {
 public:
  virtual ~Scorer() = default;

  // Responses are returned in request order. Throws ScorerError.
  virtual std::vector<ScorerResponse> score(std::span<const ScorerRequest> requests) = 0;

  virtual const std::string& vocab_digest() const = 0;

  // Provenance string recorded in filter stats and run manifests.
  virtual std::string identity() const = 0;
};

// Throws ScorerError describing the first malformed request.
void validate_request(const ScorerRequest& request);

struct CandidateScore {
  std::size_t candidate_idx = 0;
  std::size_t piece_count = 0;
  double avg_log_prob = 0.0;  // natural log, <= 0
};

struct LossParams {
  double alpha = 20.0;
  double beta = 0.2;
};

enum class MaskFilling {
  kJoint,        // all k candidate pieces masked in one query
  kIncremental,  // k queries, filling pieces left to right
};

// Pieces of `candidate`, lowercased like every other word.
std::vector<std::string> candidate_pieces(const Vocab& vocab, const std::string& candidate);

// [CLS] + pieces of the masked text with the mask expanded to one slot per
// candidate piece + [SEP]. The request id is "<example id>/<candidate_idx>".
ScorerRequest build_request(const Vocab& vocab, const MaskedExample& example,
                            std::size_t candidate_idx);

// Requests for incremental filling: query j masks pieces j..k-1, fills the
// earlier ones with the candidate, and targets piece j only.
std::vector<ScorerRequest> build_incremental_requests(const Vocab& vocab,
                                                      const MaskedExample& example,
                                                      std::size_t candidate_idx);

// Arithmetic mean; -inf if any term is -inf.
double mean_log_prob(std::span<const double> log_probs);

CandidateScore candidate_log_prob(Scorer& scorer, const Vocab& vocab,
                                  const MaskedExample& example, std::size_t candidate_idx,
                                  MaskFilling filling = MaskFilling::kJoint);

// Scores every candidate of every example with a single batched scorer call.
std::vector<std::vector<CandidateScore>> score_examples(
    Scorer& scorer, const Vocab& vocab, std::span<const MaskedExample> examples,
    MaskFilling filling = MaskFilling::kJoint);

// Seeded candidate order used before argmax, so generator order carries no
// bias. Identity when no seed is given.
std::vector<std::size_t> candidate_order(const MaskedExample& example,
                                         std::optional<std::uint64_t> seed);

// Argmax over `scores` visiting candidates in `order`; the first maximum
// wins. NaN compares as -inf. Returns an index into `scores`.
std::size_t predict_from_scores(std::span<const double> scores,
                                std::span<const std::size_t> order);
std::size_t predict_from_scores(std::span<const double> scores);

std::size_t predict(Scorer& scorer, const Vocab& vocab, const MaskedExample& example,
                    std::optional<std::uint64_t> shuffle_seed = std::nullopt);

// -log P(c1|s) + alpha * max(0, log P(c2|s) - log P(c1|s) + beta)
double pair_loss(double logp_correct, double logp_incorrect, const LossParams& params);

// Several distractors: -log P(c1|s) once, plus the margin term summed over
// every other candidate. Equals pair_loss for two candidates.
double example_loss(std::span<const double> log_probs, std::size_t answer_idx,
                    const LossParams& params);

// Context-free masked scorer: log P(piece) from smoothed unigram counts over
// the non-special pieces of the vocab. Special pieces get -inf. Pure and
// reentrant.
class UnigramScorer : public Scorer {
 public:
  // Throws std::invalid_argument for an empty corpus or smoothing <= 0.
  static UnigramScorer fit(const Vocab& vocab, std::span<const SentenceRecord> corpus,
                           double smoothing);
  static UnigramScorer from_counts(const Vocab& vocab, std::vector<std::uint64_t> counts,
                                   double smoothing);
  // Equal probability for every non-special piece.
  static UnigramScorer uniform(const Vocab& vocab);

  std::vector<ScorerResponse> score(std::span<const ScorerRequest> requests) override;
  std::vector<ScorerResponse> score_serial(std::span<const ScorerRequest> requests) const;

  const std::string& vocab_digest() const override { return vocab_.digest(); }
  std::string identity() const override { return identity_; }

  double log_prob(std::size_t piece_id) const { return log_probs_[piece_id]; }
  double log_prob(std::string_view piece) const;
  const Vocab& vocab() const { return vocab_; }
  std::uint64_t count(std::size_t piece_id) const { return counts_[piece_id]; }
  std::uint64_t total() const { return total_; }

 private:
  UnigramScorer(Vocab vocab, std::vector<std::uint64_t> counts, double smoothing);
  ScorerResponse answer(const ScorerRequest& request) const;

  Vocab vocab_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::vector<double> log_probs_;
  std::string identity_;
};

}  // namespace wsckit
