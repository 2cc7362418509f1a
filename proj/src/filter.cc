#include "wsckit/filter.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wsckit/error.h"
#include "wsckit/hash.h"
#include "wsckit/io.h"
#include "wsckit/text.h"

namespace wsckit {

namespace {

constexpr std::array<std::string_view, 4> kCategoryNames = {"unsolvable", "hard", "easy",
                                                            "noise"};

FilterDecision decide(const MaskedExample& ex, const std::vector<CandidateScore>& scores,
                      const Vocab& vocab, const FilterConfig& cfg) {
  FilterDecision d;
  d.whole_word_frac = example_whole_word_fraction(vocab, ex, cfg);
  const double correct = scores[ex.answer_idx].avg_log_prob;
  std::size_t passing = 0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    if (c == ex.answer_idx) continue;
    const double v = scores[c].avg_log_prob - correct;
    d.v.push_back(v);
    if (passes_filter(v, d.whole_word_frac, cfg)) ++passing;
  }
  const bool keep = cfg.pair_rule == PairRule::kAllPairs ? passing == d.v.size() : passing > 0;
  d.outcome = keep && !d.v.empty() ? FilterOutcome::kKept : FilterOutcome::kRejected;
  return d;
}

}  // namespace

void FilterConfig::validate() const {
  if (!(v_min <= v_max)) throw std::invalid_argument("filter: v_min must be <= v_max");
  if (!(min_whole_word_frac >= 0.0 && min_whole_word_frac <= 1.0)) {
    throw std::invalid_argument("filter: min_whole_word_frac must be in [0, 1]");
  }
}

nlohmann::ordered_json FilterConfig::to_json() const {
  nlohmann::ordered_json j;
  j["v_min"] = v_min;
  j["v_max"] = v_max;
  j["min_whole_word_frac"] = min_whole_word_frac;
  j["pair_rule"] = pair_rule == PairRule::kAllPairs ? "all" : "any";
  j["whole_word_scope"] = whole_word_scope == WholeWordScope::kSentence ? "sentence" : "candidates";
  j["whole_word_denominator"] =
      denominator == WholeWordDenominator::kPieces ? "pieces" : "words";
  return j;
}

double v_score(Scorer& scorer, const Vocab& vocab, const MaskedExample& example) {
  if (example.candidates.size() != 2) {
    throw std::invalid_argument("v_score needs exactly two candidates, example " + example.id +
                                " has " + std::to_string(example.candidates.size()));
  }
  const auto scores = score_examples(scorer, vocab, std::span(&example, 1)).front();
  return scores[1 - example.answer_idx].avg_log_prob - scores[example.answer_idx].avg_log_prob;
}

bool passes_filter(double v, double whole_word_frac, const FilterConfig& cfg) {
  return cfg.v_min <= v && v <= cfg.v_max && whole_word_frac >= cfg.min_whole_word_frac;
}

double example_whole_word_fraction(const Vocab& vocab, const MaskedExample& example,
                                   const FilterConfig& cfg) {
  if (cfg.whole_word_scope == WholeWordScope::kSentence) {
    return whole_word_fraction(vocab, example.filled(example.answer_idx), cfg.denominator);
  }
  std::string joined;
  for (const std::string& c : example.candidates) joined += c + " ";
  return whole_word_fraction(vocab, joined, cfg.denominator);
}

nlohmann::ordered_json FilterStats::to_json() const {
  nlohmann::ordered_json j;
  j["total"] = total;
  j["kept"] = kept;
  j["errored"] = errored;
  j["keep_rate"] = keep_rate();
  j["scorer_digest"] = scorer_digest;
  j["config"] = config.to_json();
  return j;
}

FilterResult filter_dataset(Scorer& scorer, const Vocab& vocab,
                            std::span<const MaskedExample> dataset, const FilterConfig& cfg,
                            std::size_t batch_size) {
  cfg.validate();
  if (batch_size == 0) batch_size = 1;
  FilterResult result;
  result.decisions.resize(dataset.size());
  result.stats.config = cfg;
  result.stats.scorer_digest = scorer.identity();

  auto errored = [](const std::string& why) {
    FilterDecision d;
    d.outcome = FilterOutcome::kErrored;
    d.error = why;
    return d;
  };

  for (std::size_t start = 0; start < dataset.size(); start += batch_size) {
    const std::size_t end = std::min(dataset.size(), start + batch_size);
    const auto batch = dataset.subspan(start, end - start);
    std::vector<std::vector<CandidateScore>> scores;
    bool batch_ok = true;
    try {
      scores = score_examples(scorer, vocab, batch);
    } catch (const std::exception&) {
      batch_ok = false;
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      FilterDecision& d = result.decisions[start + i];
      try {
        if (batch_ok) {
          d = decide(batch[i], scores[i], vocab, cfg);
        } else {
          // Isolate the failing examples.
          d = decide(batch[i], score_examples(scorer, vocab, batch.subspan(i, 1)).front(), vocab,
                     cfg);
        }
      } catch (const std::exception& e) {
        d = errored(e.what());
      }
    }
  }

  for (std::size_t i = 0; i < dataset.size(); ++i) {
    ++result.stats.total;
    switch (result.decisions[i].outcome) {
      case FilterOutcome::kKept:
        ++result.stats.kept;
        result.kept.push_back(dataset[i]);
        break;
      case FilterOutcome::kRejected:
        ++result.stats.rejected;
        break;
      case FilterOutcome::kErrored:
        ++result.stats.errored;
        break;
    }
  }
  return result;
}

std::string_view category_name(QualityCategory c) { return kCategoryNames[static_cast<int>(c)]; }

QualityCategory parse_category(std::string_view name) {
  const std::string lower = to_lower_ascii(trim(name));
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (lower == kCategoryNames[i]) return static_cast<QualityCategory>(i);
  }
  throw DataError("unknown quality category '" + std::string(name) + "'");
}

double QualityTally::percent(QualityCategory c) const {
  if (sample_size == 0) return 0.0;
  return 100.0 * static_cast<double>(count(c)) / static_cast<double>(sample_size);
}

nlohmann::ordered_json QualityTally::to_json() const {
  nlohmann::ordered_json j;
  j["sample_size"] = sample_size;
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    const auto c = static_cast<QualityCategory>(i);
    j[std::string(kCategoryNames[i])] = {{"count", count(c)}, {"percent", percent(c)}};
  }
  return j;
}

std::vector<MaskedExample> audit_sample(std::span<const MaskedExample> dataset, std::size_t n,
                                        std::uint64_t seed) {
  if (n > dataset.size()) {
    throw std::invalid_argument("audit sample of " + std::to_string(n) + " from " +
                                std::to_string(dataset.size()) + " examples");
  }
  std::vector<std::pair<std::uint64_t, std::size_t>> ranked;
  ranked.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    ranked.emplace_back(seeded_hash(seed, dataset[i].id + "\x1f" + std::to_string(i)), i);
  }
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end());
  std::vector<std::size_t> chosen;
  for (std::size_t k = 0; k < n; ++k) chosen.push_back(ranked[k].second);
  std::sort(chosen.begin(), chosen.end());
  std::vector<MaskedExample> out;
  for (std::size_t i : chosen) out.push_back(dataset[i]);
  return out;
}

QualityTally tally_labels(std::span<const std::string> labels) {
  QualityTally t;
  for (const std::string& l : labels) {
    ++t.counts[static_cast<int>(parse_category(l))];
    ++t.sample_size;
  }
  return t;
}

QualityTally tally_audit(const std::string& labels_path) {
  QualityTally t;
  for_each_line(labels_path, [&](std::string_view line, std::size_t n) {
    if (trim(line).empty()) return;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw DataError(labels_path + ":" + std::to_string(n) + ": expected id<TAB>category", n);
    }
    const std::string id(line.substr(0, tab));
    QualityCategory c;
    try {
      c = parse_category(line.substr(tab + 1));
    } catch (const DataError& e) {
      throw DataError(labels_path + ":" + std::to_string(n) + ": " + e.what(), n, id);
    }
    ++t.counts[static_cast<int>(c)];
    ++t.sample_size;
  });
  return t;
}

}  // namespace wsckit
