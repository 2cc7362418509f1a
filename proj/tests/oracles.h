#pragma once

// Reference implementations written without reusing library internals.
// Tests compare library output against these.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wsckit/corpus.h"
#include "wsckit/evaluator.h"
#include "wsckit/example.h"
#include "wsckit/scoring.h"
#include "wsckit/wordpiece.h"

namespace oracle {

// Margin loss written as a case split rather than a clamp.
double pair_loss(double lc, double li, double alpha, double beta);

// Unigram log-probabilities recomputed from scratch: counts over the
// corpus pieces, additive smoothing over non-bracketed pieces.
class Unigram {
 public:
  Unigram(const wsckit::Vocab& vocab, const std::vector<wsckit::SentenceRecord>& corpus,
          double smoothing);
  double log_prob(const std::string& piece) const;
  // Mean over the candidate's pieces, summed in long double.
  double candidate_mean(const std::string& candidate) const;

 private:
  const wsckit::Vocab& vocab_;
  std::map<std::string, std::uint64_t> counts_;
  long double total_ = 0;
  long double content_ = 0;
  double smoothing_;
};

// Scorer answering every target from a fixed table; missing pieces get
// `fallback`.
class TableScorer : public wsckit::Scorer {
 public:
  TableScorer(std::map<std::string, double> table, std::string digest, double fallback = -50.0)
      : table_(std::move(table)), digest_(std::move(digest)), fallback_(fallback) {}
  std::vector<wsckit::ScorerResponse> score(
      std::span<const wsckit::ScorerRequest> requests) override;
  const std::string& vocab_digest() const override { return digest_; }
  std::string identity() const override { return "table"; }
  std::size_t calls = 0;

 private:
  std::map<std::string, double> table_;
  std::string digest_;
  double fallback_;
};

struct Recount {
  std::size_t total = 0, correct = 0;
  std::size_t nonassoc_total = 0, nonassoc_correct = 0;
  std::size_t assoc_total = 0, assoc_correct = 0;
  std::size_t unsw_total = 0, unsw_correct = 0;
  std::size_t sw_total = 0, sw_correct = 0;
  std::size_t flips = 0, flips_correct = 0;
};

// Brute-force WSC recount. `pred` / `pred_switched` give the predicted
// candidate index per example; pred_switched is ignored for unswitchable
// examples.
Recount recount(const std::vector<wsckit::MaskedExample>& examples,
                const std::vector<wsckit::WscAnnotation>& annotations,
                const std::vector<std::size_t>& pred,
                const std::vector<std::size_t>& pred_switched);

// Greedy longest-match-first by exhaustive search over prefix lengths.
std::vector<std::string> wordpiece(const wsckit::Vocab& vocab, const std::string& word);

}  // namespace oracle
