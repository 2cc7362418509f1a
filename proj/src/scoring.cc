#include "wsckit/scoring.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "wsckit/error.h"
#include "wsckit/hash.h"

namespace wsckit {

void validate_request(const ScorerRequest& r) {
  auto fail = [&](const std::string& why) {
    throw ScorerError("request " + r.id + ": " + why);
  };
  if (r.pieces.empty()) fail("empty piece sequence");
  if (r.mask_positions.size() != r.targets.size()) {
    fail("mask_positions and targets differ in length");
  }
  for (std::size_t i = 0; i < r.mask_positions.size(); ++i) {
    if (r.mask_positions[i] >= r.pieces.size()) fail("mask position out of range");
    if (i > 0 && r.mask_positions[i] <= r.mask_positions[i - 1]) {
      fail("mask positions not strictly ascending");
    }
  }
}

std::vector<std::string> candidate_pieces(const Vocab& vocab, const std::string& candidate) {
  std::vector<std::string> pieces = tokenize_text(vocab, candidate);
  if (pieces.empty()) throw DataError("candidate '" + candidate + "' has no pieces");
  return pieces;
}

namespace {

struct MaskedLayout {
  std::vector<std::string> pieces;
  std::vector<std::size_t> slots;
};

MaskedLayout layout(const Vocab& vocab, const MaskedExample& example, std::size_t k) {
  MaskedLayout out;
  out.pieces.emplace_back(kClsToken);
  bool seen_mask = false;
  for (const std::string& word : basic_tokenize(example.masked_text)) {
    if (word == kMaskToken && !seen_mask) {
      seen_mask = true;
      for (std::size_t j = 0; j < k; ++j) {
        out.slots.push_back(out.pieces.size());
        out.pieces.emplace_back(kMaskToken);
      }
      continue;
    }
    for (std::string& p : tokenize_word(vocab, word)) out.pieces.push_back(std::move(p));
  }
  out.pieces.emplace_back(kSepToken);
  if (!seen_mask) throw DataError("example has no [MASK]", 0, example.id);
  return out;
}

}  // namespace

ScorerRequest build_request(const Vocab& vocab, const MaskedExample& example,
                            std::size_t candidate_idx) {
  if (candidate_idx >= example.candidates.size()) {
    throw std::out_of_range("candidate index out of range");
  }
  std::vector<std::string> targets = candidate_pieces(vocab, example.candidates[candidate_idx]);
  MaskedLayout l = layout(vocab, example, targets.size());
  ScorerRequest r;
  r.id = example.id + "/" + std::to_string(candidate_idx);
  r.pieces = std::move(l.pieces);
  r.mask_positions = std::move(l.slots);
  r.targets = std::move(targets);
  return r;
}

std::vector<ScorerRequest> build_incremental_requests(const Vocab& vocab,
                                                      const MaskedExample& example,
                                                      std::size_t candidate_idx) {
  const ScorerRequest joint = build_request(vocab, example, candidate_idx);
  std::vector<ScorerRequest> out;
  for (std::size_t j = 0; j < joint.targets.size(); ++j) {
    ScorerRequest r;
    r.id = joint.id + "." + std::to_string(j);
    r.pieces = joint.pieces;
    for (std::size_t f = 0; f < j; ++f) r.pieces[joint.mask_positions[f]] = joint.targets[f];
    r.mask_positions = {joint.mask_positions[j]};
    r.targets = {joint.targets[j]};
    out.push_back(std::move(r));
  }
  return out;
}

double mean_log_prob(std::span<const double> log_probs) {
  if (log_probs.empty()) throw std::invalid_argument("mean of no log-probabilities");
  double sum = 0.0;
  for (double lp : log_probs) {
    if (lp == kNegInf || std::isnan(lp)) return kNegInf;
    sum += lp;
  }
  return sum / static_cast<double>(log_probs.size());
}

std::vector<std::vector<CandidateScore>> score_examples(Scorer& scorer, const Vocab& vocab,
                                                        std::span<const MaskedExample> examples,
                                                        MaskFilling filling) {
  // Flatten every (example, candidate) into requests; remember the slices.
  struct Slice {
    std::size_t first = 0;
    std::size_t count = 0;
  };
  std::vector<ScorerRequest> requests;
  std::vector<std::vector<Slice>> slices(examples.size());
  for (std::size_t e = 0; e < examples.size(); ++e) {
    for (std::size_t c = 0; c < examples[e].candidates.size(); ++c) {
      Slice s{requests.size(), 0};
      if (filling == MaskFilling::kJoint) {
        requests.push_back(build_request(vocab, examples[e], c));
      } else {
        for (ScorerRequest& r : build_incremental_requests(vocab, examples[e], c)) {
          requests.push_back(std::move(r));
        }
      }
      s.count = requests.size() - s.first;
      slices[e].push_back(s);
    }
  }

  const std::vector<ScorerResponse> responses = scorer.score(requests);
  if (responses.size() != requests.size()) {
    throw ProtocolError("scorer returned " + std::to_string(responses.size()) +
                        " responses for " + std::to_string(requests.size()) + " requests");
  }

  std::vector<std::vector<CandidateScore>> out(examples.size());
  for (std::size_t e = 0; e < examples.size(); ++e) {
    for (std::size_t c = 0; c < slices[e].size(); ++c) {
      std::vector<double> lps;
      for (std::size_t r = slices[e][c].first; r < slices[e][c].first + slices[e][c].count; ++r) {
        if (responses[r].id != requests[r].id ||
            responses[r].log_probs.size() != requests[r].mask_positions.size()) {
          throw ProtocolError("response does not match request " + requests[r].id);
        }
        lps.insert(lps.end(), responses[r].log_probs.begin(), responses[r].log_probs.end());
      }
      out[e].push_back(CandidateScore{c, lps.size(), mean_log_prob(lps)});
    }
  }
  return out;
}

CandidateScore candidate_log_prob(Scorer& scorer, const Vocab& vocab,
                                  const MaskedExample& example, std::size_t candidate_idx,
                                  MaskFilling filling) {
  std::vector<ScorerRequest> requests;
  if (filling == MaskFilling::kJoint) {
    requests.push_back(build_request(vocab, example, candidate_idx));
  } else {
    requests = build_incremental_requests(vocab, example, candidate_idx);
  }
  const std::vector<ScorerResponse> responses = scorer.score(requests);
  if (responses.size() != requests.size()) {
    throw ProtocolError("scorer response count mismatch");
  }
  std::vector<double> lps;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (responses[i].log_probs.size() != requests[i].mask_positions.size()) {
      throw ProtocolError("response length mismatch for " + requests[i].id);
    }
    lps.insert(lps.end(), responses[i].log_probs.begin(), responses[i].log_probs.end());
  }
  return CandidateScore{candidate_idx, lps.size(), mean_log_prob(lps)};
}

std::vector<std::size_t> candidate_order(const MaskedExample& example,
                                         std::optional<std::uint64_t> seed) {
  std::vector<std::size_t> order(example.candidates.size());
  std::iota(order.begin(), order.end(), 0);
  if (!seed) return order;
  std::vector<std::uint64_t> keys(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    keys[i] = seeded_hash(*seed, example.id + "\x1f" + std::to_string(i));
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return keys[a] != keys[b] ? keys[a] < keys[b] : a < b;
  });
  return order;
}

std::size_t predict_from_scores(std::span<const double> scores,
                                std::span<const std::size_t> order) {
  if (scores.empty() || order.size() != scores.size()) {
    throw std::invalid_argument("predict: empty scores or bad order");
  }
  auto value = [&](std::size_t i) { return std::isnan(scores[i]) ? kNegInf : scores[i]; };
  std::size_t best = order.front();
  for (std::size_t i : order) {
    if (value(i) > value(best)) best = i;
  }
  return best;
}

std::size_t predict_from_scores(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  return predict_from_scores(scores, order);
}

std::size_t predict(Scorer& scorer, const Vocab& vocab, const MaskedExample& example,
                    std::optional<std::uint64_t> shuffle_seed) {
  if (example.candidates.size() < 2) throw std::invalid_argument("predict: fewer than 2 candidates");
  const auto scored = score_examples(scorer, vocab, std::span(&example, 1));
  std::vector<double> values;
  for (const CandidateScore& s : scored.front()) values.push_back(s.avg_log_prob);
  return predict_from_scores(values, candidate_order(example, shuffle_seed));
}

double pair_loss(double logp_correct, double logp_incorrect, const LossParams& params) {
  const double margin = logp_incorrect - logp_correct + params.beta;
  return -logp_correct + params.alpha * std::max(0.0, margin);
}

double example_loss(std::span<const double> log_probs, std::size_t answer_idx,
                    const LossParams& params) {
  if (answer_idx >= log_probs.size()) throw std::out_of_range("example_loss: answer index");
  const double correct = log_probs[answer_idx];
  double margins = 0.0;
  for (std::size_t c = 0; c < log_probs.size(); ++c) {
    if (c != answer_idx) margins += std::max(0.0, log_probs[c] - correct + params.beta);
  }
  return -correct + params.alpha * margins;
}

UnigramScorer::UnigramScorer(Vocab vocab, std::vector<std::uint64_t> counts, double smoothing)
    : vocab_(std::move(vocab)), counts_(std::move(counts)) {
  if (!(smoothing > 0.0)) throw std::invalid_argument("smoothing must be > 0");
  if (counts_.size() != vocab_.size()) throw std::invalid_argument("count vector size mismatch");
  std::size_t content = 0;
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (Vocab::is_special(vocab_.piece(i))) {
      counts_[i] = 0;
    } else {
      ++content;
      total_ += counts_[i];
    }
  }
  if (content == 0) throw std::invalid_argument("vocab has no content pieces");
  const double denom = static_cast<double>(total_) + smoothing * static_cast<double>(content);
  log_probs_.resize(vocab_.size());
  std::ostringstream ident;
  ident.precision(17);
  ident << vocab_.digest() << ' ' << smoothing;
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (Vocab::is_special(vocab_.piece(i))) {
      log_probs_[i] = kNegInf;
    } else {
      log_probs_[i] = std::log((static_cast<double>(counts_[i]) + smoothing) / denom);
      ident << ' ' << counts_[i];
    }
  }
  identity_ = "unigram:" + sha256_hex(ident.str()).substr(0, 16);
}

UnigramScorer UnigramScorer::fit(const Vocab& vocab, std::span<const SentenceRecord> corpus,
                                 double smoothing) {
  if (corpus.empty()) throw std::invalid_argument("cannot fit a scorer on an empty corpus");
  std::vector<std::uint64_t> counts(vocab.size(), 0);
  for (const SentenceRecord& rec : corpus) {
    for (const std::string& word : rec.words) {
      for (const std::string& piece : tokenize_text(vocab, word)) {
        if (auto id = vocab.id(piece)) ++counts[*id];
      }
    }
  }
  return UnigramScorer(vocab, std::move(counts), smoothing);
}

UnigramScorer UnigramScorer::from_counts(const Vocab& vocab, std::vector<std::uint64_t> counts,
                                         double smoothing) {
  return UnigramScorer(vocab, std::move(counts), smoothing);
}

UnigramScorer UnigramScorer::uniform(const Vocab& vocab) {
  return UnigramScorer(vocab, std::vector<std::uint64_t>(vocab.size(), 0), 1.0);
}

double UnigramScorer::log_prob(std::string_view piece) const {
  auto id = vocab_.id(piece);
  return id ? log_probs_[*id] : kNegInf;
}

ScorerResponse UnigramScorer::answer(const ScorerRequest& request) const {
  ScorerResponse out;
  out.id = request.id;
  out.log_probs.reserve(request.targets.size());
  for (const std::string& t : request.targets) out.log_probs.push_back(log_prob(t));
  return out;
}

std::vector<ScorerResponse> UnigramScorer::score_serial(
    std::span<const ScorerRequest> requests) const {
  std::vector<ScorerResponse> out;
  out.reserve(requests.size());
  for (const ScorerRequest& r : requests) {
    validate_request(r);
    out.push_back(answer(r));
  }
  return out;
}

std::vector<ScorerResponse> UnigramScorer::score(std::span<const ScorerRequest> requests) {
  for (const ScorerRequest& r : requests) validate_request(r);
  const auto n = static_cast<std::ptrdiff_t>(requests.size());
  std::vector<ScorerResponse> out(requests.size());
#pragma omp parallel for schedule(static) if (n > 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = answer(requests[i]);
  return out;
}

}  // namespace wsckit
