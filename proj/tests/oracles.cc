#include "oracles.h"

#include <cctype>
#include <cmath>
#include <limits>

namespace oracle {

double pair_loss(double lc, double li, double alpha, double beta) {
  if (li + beta > lc) return -lc + alpha * (li - lc + beta);
  return -lc;
}

namespace {

bool bracketed(const std::string& p) {
  return p.size() >= 2 && p.front() == '[' && p.back() == ']' &&
         p.find(' ') == std::string::npos;
}

}  // namespace

Unigram::Unigram(const wsckit::Vocab& vocab, const std::vector<wsckit::SentenceRecord>& corpus,
                 double smoothing)
    : vocab_(vocab), smoothing_(smoothing) {
  for (const auto& rec : corpus) {
    for (const auto& w : rec.words) {
      for (const auto& p : wsckit::tokenize_text(vocab, w)) {
        if (!bracketed(p)) ++counts_[p];
      }
    }
  }
  for (const auto& [p, c] : counts_) total_ += c;
  for (const auto& p : vocab.pieces()) {
    if (!bracketed(p)) content_ += 1;
  }
}

double Unigram::log_prob(const std::string& piece) const {
  if (bracketed(piece) || !vocab_.contains(piece)) {
    return -std::numeric_limits<double>::infinity();
  }
  auto it = counts_.find(piece);
  const double c = it == counts_.end() ? 0.0 : static_cast<double>(it->second);
  const double denom = static_cast<double>(total_) + smoothing_ * static_cast<double>(content_);
  return std::log((c + smoothing_) / denom);
}

double Unigram::candidate_mean(const std::string& candidate) const {
  const auto pieces = wsckit::tokenize_text(vocab_, candidate);
  long double sum = 0;
  for (const auto& p : pieces) sum += log_prob(p);
  return static_cast<double>(sum / static_cast<long double>(pieces.size()));
}

std::vector<wsckit::ScorerResponse> TableScorer::score(
    std::span<const wsckit::ScorerRequest> requests) {
  ++calls;
  std::vector<wsckit::ScorerResponse> out;
  for (const auto& r : requests) {
    wsckit::ScorerResponse resp{r.id, {}};
    for (const auto& t : r.targets) {
      auto it = table_.find(t);
      resp.log_probs.push_back(it == table_.end() ? fallback_ : it->second);
    }
    out.push_back(std::move(resp));
  }
  return out;
}

Recount recount(const std::vector<wsckit::MaskedExample>& examples,
                const std::vector<wsckit::WscAnnotation>& annotations,
                const std::vector<std::size_t>& pred,
                const std::vector<std::size_t>& pred_switched) {
  Recount r;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    const wsckit::WscAnnotation* ann = nullptr;
    for (const auto& a : annotations) {
      if (a.example_id == ex.id) ann = &a;
    }
    const bool ok = pred[i] == ex.answer_idx;
    r.total += 1;
    r.correct += ok;
    if (ann->associative) {
      r.assoc_total += 1;
      r.assoc_correct += ok;
    } else {
      r.nonassoc_total += 1;
      r.nonassoc_correct += ok;
    }
    if (ann->switchable) {
      const bool sw_ok = pred_switched[i] == *ann->switched_answer_idx;
      r.unsw_total += 1;
      r.unsw_correct += ok;
      r.sw_total += 1;
      r.sw_correct += sw_ok;
      // Candidate lists are shared, so a different index is a different party.
      const bool flip = pred[i] != pred_switched[i];
      r.flips += flip;
      r.flips_correct += flip && ok && sw_ok;
    }
  }
  return r;
}

std::vector<std::string> wordpiece(const wsckit::Vocab& vocab, const std::string& word) {
  std::string w;
  for (char c : word) w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < w.size()) {
    std::optional<std::string> best;
    std::size_t best_end = start;
    for (std::size_t end = start + 1; end <= w.size(); ++end) {
      std::string piece = (start == 0 ? "" : "##") + w.substr(start, end - start);
      if (vocab.contains(piece)) {
        best = piece;
        best_end = end;
      }
    }
    if (!best) return {"[UNK]"};
    out.push_back(*best);
    start = best_end;
  }
  return out;
}

}  // namespace oracle
