#include "wsckit/evaluator.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "wsckit/io.h"
#include "wsckit/text.h"

namespace wsckit {

using nlohmann::json;
using nlohmann::ordered_json;

WscAnnotation annotation_from_json(const json& j) {
  WscAnnotation a;
  a.example_id = j.at("example_id").get<std::string>();
  a.associative = j.value("associative", false);
  a.switchable = j.value("switchable", false);
  if (j.contains("switched_text") && !j["switched_text"].is_null()) {
    a.switched_text = j["switched_text"].get<std::string>();
  }
  if (j.contains("switched_answer_idx") && !j["switched_answer_idx"].is_null()) {
    a.switched_answer_idx = j["switched_answer_idx"].get<std::size_t>();
  }
  if (a.switchable != a.switched_text.has_value()) {
    throw DataError("annotation " + a.example_id +
                        ": switched_text must be present exactly when switchable",
                    0, a.example_id);
  }
  if (a.switchable && !a.switched_answer_idx) {
    throw DataError("annotation " + a.example_id + ": switchable without switched_answer_idx",
                    0, a.example_id);
  }
  return a;
}

std::vector<WscAnnotation> read_annotations(const std::string& path) {
  std::vector<WscAnnotation> out;
  for_each_line(path, [&](std::string_view line, std::size_t n) {
    if (trim(line).empty()) return;
    try {
      out.push_back(annotation_from_json(json::parse(line)));
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(n) + ": " + e.what(), n, e.record_id());
    } catch (const json::exception& e) {
      throw DataError(path + ":" + std::to_string(n) + ": " + e.what(), n);
    }
  });
  return out;
}

namespace {

ordered_json subset_json(const SubsetScore& s) {
  ordered_json j;
  j["total"] = s.total;
  j["correct"] = s.correct;
  if (auto a = s.accuracy()) {
    j["accuracy"] = *a;
  } else {
    j["accuracy"] = nullptr;
  }
  return j;
}

void tally(SubsetScore& s, bool correct) {
  ++s.total;
  if (correct) ++s.correct;
}

}  // namespace

ordered_json MetricsReport::to_json() const {
  ordered_json j;
  j["overall"] = subset_json(overall);
  j["non_associative"] = subset_json(non_associative);
  j["associative"] = subset_json(associative);
  j["unswitched"] = subset_json(unswitched);
  j["switched"] = subset_json(switched);
  j["consistency_pairs"] = consistency_pairs;
  if (auto c = consistency()) {
    j["consistency"] = *c;
  } else {
    j["consistency"] = nullptr;
  }
  if (wnli_accuracy) {
    j["wnli"] = *wnli_accuracy;
  } else {
    j["wnli"] = nullptr;
  }
  return j;
}

double consistency(std::span<const std::string> preds_unswitched,
                   std::span<const std::string> preds_switched) {
  if (preds_unswitched.size() != preds_switched.size()) {
    throw std::invalid_argument("consistency: prediction lists differ in length");
  }
  if (preds_unswitched.empty()) return 0.0;
  std::size_t flips = 0;
  for (std::size_t i = 0; i < preds_unswitched.size(); ++i) {
    if (match_normalize(preds_unswitched[i]) != match_normalize(preds_switched[i])) ++flips;
  }
  return static_cast<double>(flips) / static_cast<double>(preds_unswitched.size());
}

double consistency(std::span<const std::string> preds_unswitched,
                   std::span<const std::string> preds_switched,
                   const std::vector<bool>& correct_unswitched,
                   const std::vector<bool>& correct_switched, ConsistencyRule rule) {
  const std::size_t n = preds_unswitched.size();
  if (preds_switched.size() != n || correct_unswitched.size() != n ||
      correct_switched.size() != n) {
    throw std::invalid_argument("consistency: input lists differ in length");
  }
  if (n == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool flipped = match_normalize(preds_unswitched[i]) != match_normalize(preds_switched[i]);
    if (rule == ConsistencyRule::kFlipAndCorrect) {
      flipped = flipped && correct_unswitched[i] && correct_switched[i];
    }
    if (flipped) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

MetricsReport aggregate_wsc(std::span<const WscOutcome> outcomes, ConsistencyRule rule) {
  MetricsReport r;
  for (const WscOutcome& o : outcomes) {
    tally(r.overall, o.correct);
    tally(o.associative ? r.associative : r.non_associative, o.correct);
    if (!o.switched_party) continue;
    tally(r.unswitched, o.correct);
    tally(r.switched, o.switched_correct.value_or(false));
    ++r.consistency_pairs;
    bool flipped = match_normalize(*o.predicted_party) != match_normalize(*o.switched_party);
    if (rule == ConsistencyRule::kFlipAndCorrect) {
      flipped = flipped && o.correct && o.switched_correct.value_or(false);
    }
    if (flipped) ++r.consistent;
  }
  return r;
}

namespace {

std::size_t predict_one(const MaskedExample& ex, const std::vector<CandidateScore>& scores,
                        const std::optional<std::uint64_t>& seed) {
  std::vector<double> values;
  values.reserve(scores.size());
  for (const CandidateScore& s : scores) values.push_back(s.avg_log_prob);
  const std::vector<std::size_t> order = candidate_order(ex, seed);
  return predict_from_scores(values, order);
}

}  // namespace

MetricsReport evaluate_wsc(Scorer& scorer, const Vocab& vocab,
                           std::span<const MaskedExample> examples,
                           std::span<const WscAnnotation> annotations,
                           const EvalOptions& options, std::vector<WscOutcome>* outcomes) {
  std::unordered_map<std::string, const WscAnnotation*> by_id;
  for (const WscAnnotation& a : annotations) by_id.emplace(a.example_id, &a);

  // Originals first, then the switched variants, scored in one pass.
  std::vector<MaskedExample> batch(examples.begin(), examples.end());
  std::vector<const WscAnnotation*> ann(examples.size());
  std::vector<std::optional<std::size_t>> switched_slot(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const MaskedExample& ex = examples[i];
    auto it = by_id.find(ex.id);
    if (it == by_id.end()) {
      throw DataError("no annotation for example " + ex.id, 0, ex.id);
    }
    ann[i] = it->second;
    if (!ann[i]->switchable) continue;
    MaskedExample sw = ex;
    sw.id = ex.id + "/switched";
    sw.masked_text = *ann[i]->switched_text;
    sw.answer_idx = *ann[i]->switched_answer_idx;
    if (auto bad = check_invariants(sw)) {
      throw DataError("switched variant of " + ex.id + ": " + *bad, 0, ex.id);
    }
    switched_slot[i] = batch.size();
    batch.push_back(std::move(sw));
  }

  const auto scores = score_examples(scorer, vocab, batch);

  std::vector<WscOutcome> local;
  local.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const MaskedExample& ex = examples[i];
    WscOutcome o;
    o.example_id = ex.id;
    o.associative = ann[i]->associative;
    o.predicted = predict_one(ex, scores[i], options.shuffle_seed);
    o.correct = o.predicted == ex.answer_idx;
    if (switched_slot[i]) {
      const MaskedExample& sw = batch[*switched_slot[i]];
      const std::size_t p = predict_one(sw, scores[*switched_slot[i]], options.shuffle_seed);
      o.predicted_party = ex.candidates[o.predicted];
      o.switched_party = sw.candidates[p];
      o.switched_correct = p == sw.answer_idx;
    }
    local.push_back(std::move(o));
  }
  MetricsReport report = aggregate_wsc(local, options.consistency_rule);
  if (outcomes) *outcomes = std::move(local);
  return report;
}

// --- WNLI -------------------------------------------------------------

namespace {

const std::unordered_set<std::string>& pronouns() {
  static const std::unordered_set<std::string> kPronouns = {
      "he",   "him",  "his",  "she",    "her",     "hers",    "it",     "its",
      "they", "them", "their", "theirs", "himself", "herself", "itself", "themselves",
      "i",    "me",   "my",   "we",     "us",      "our",     "you",    "your"};
  return kPronouns;
}

bool is_terminator(std::string_view w) { return w == "." || w == "!" || w == "?"; }

std::vector<std::string> lowered(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(to_lower_ascii(t.text));
  return out;
}

struct Candidate {
  std::size_t pronoun = 0;   // premise token index
  std::size_t prefix = 0;    // hypothesis tokens before the candidate
  std::size_t length = 0;    // candidate tokens
  std::size_t suffix = 0;    // hypothesis tokens after the candidate
};

}  // namespace

std::string wnli_normalize(std::string_view text) {
  std::string s = match_normalize(text);
  if (!s.empty() && is_terminator(std::string_view(&s.back(), 1))) s.pop_back();
  return std::string(trim(s));
}

WnliAlignment WnliTransformer::transform(std::string_view premise, std::string_view hypothesis,
                                         std::string id) const {
  const std::vector<Token> ptok = tokenize_words(premise, abbreviations_);
  std::vector<Token> htok = tokenize_words(hypothesis, abbreviations_);
  if (!htok.empty() && is_terminator(htok.back().text)) htok.pop_back();
  if (ptok.empty() || htok.empty()) {
    throw WnliAlignmentError(WnliAlignmentError::Kind::kNoAlignment, "empty sentence");
  }
  const std::vector<std::string> P = lowered(ptok);
  const std::vector<std::string> H = lowered(htok);

  std::vector<Candidate> found;
  std::set<std::pair<std::size_t, std::string>> seen;
  for (std::size_t p = 0; p < P.size(); ++p) {
    if (!pronouns().count(P[p])) continue;
    for (std::size_t a = 0; a <= p && a < H.size(); ++a) {
      if (!std::equal(H.begin(), H.begin() + a, P.begin() + (p - a))) continue;
      for (std::size_t len = 1; a + len <= H.size(); ++len) {
        const std::size_t r = H.size() - a - len;
        // The window must share at least one token with the hypothesis.
        if (a + r == 0 || p + 1 + r > P.size()) continue;
        if (!std::equal(H.begin() + a + len, H.end(), P.begin() + p + 1)) continue;
        std::string key;
        for (std::size_t k = a; k < a + len; ++k) key += H[k] + " ";
        if (seen.emplace(p, key).second) found.push_back({p, a, len, r});
      }
    }
  }
  if (found.empty()) {
    throw WnliAlignmentError(WnliAlignmentError::Kind::kNoAlignment,
                             "no pronoun substitution turns the premise into the hypothesis");
  }
  if (found.size() > 1) {
    throw WnliAlignmentError(WnliAlignmentError::Kind::kAmbiguous,
                             std::to_string(found.size()) + " competing alignments");
  }
  const Candidate& c = found.front();
  const Token& pron = ptok[c.pronoun];

  WnliAlignment out;
  out.pronoun = pron.text;
  const std::string answer(hypothesis.substr(htok[c.prefix].begin,
                                             htok[c.prefix + c.length - 1].end -
                                                 htok[c.prefix].begin));

  std::string masked(premise);
  masked.replace(pron.begin, pron.end - pron.begin, "[MASK]");
  const std::size_t shift = std::string_view("[MASK]").size();
  out.window_begin = ptok[c.pronoun - c.prefix].begin;
  const std::size_t raw_end = c.suffix > 0 ? ptok[c.pronoun + c.suffix].end : pron.end;
  out.window_end = raw_end - (pron.end - pron.begin) + shift;

  std::vector<std::string> words;
  words.reserve(ptok.size());
  for (const Token& t : ptok) words.push_back(t.text);
  const std::vector<std::string> tags = tagger_.tag(words);

  std::unordered_set<std::string> excluded;
  excluded.insert(match_normalize(answer));
  for (std::size_t k = c.prefix; k < c.prefix + c.length; ++k) excluded.insert(H[k]);
  std::vector<std::string> candidates = {answer};
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i == c.pronoun || !is_noun_tag(tags[i]) || !has_alnum(words[i])) continue;
    const std::string norm = match_normalize(words[i]);
    if (excluded.insert(norm).second) candidates.push_back(words[i]);
  }

  out.example.id = std::move(id);
  out.example.masked_text = std::move(masked);
  out.example.candidates = std::move(candidates);
  out.example.answer_idx = 0;
  out.example.source = "wnli";
  return out;
}

bool wnli_round_trips(const WnliAlignment& alignment, std::string_view hypothesis,
                      const AbbreviationSet& abbreviations) {
  const std::string& masked = alignment.example.masked_text;
  if (alignment.window_end > masked.size() || alignment.window_begin > alignment.window_end) {
    return false;
  }
  std::string window =
      masked.substr(alignment.window_begin, alignment.window_end - alignment.window_begin);
  const std::size_t slot = window.find("[MASK]");
  if (slot == std::string::npos) return false;
  window.replace(slot, 6, alignment.example.answer());

  auto norm_tokens = [&](std::string_view s) {
    std::vector<Token> t = tokenize_words(s, abbreviations);
    if (!t.empty() && is_terminator(t.back().text)) t.pop_back();
    return lowered(t);
  };
  return norm_tokens(window) == norm_tokens(hypothesis);
}

std::vector<WnliRow> read_wnli_tsv(const std::string& path) {
  std::vector<WnliRow> rows;
  for_each_line(path, [&](std::string_view line, std::size_t n) {
    if (n == 1 || trim(line).empty()) return;
    const std::vector<std::string> f = split(line, '\t');
    if (f.size() != 4) {
      throw DataError(path + ":" + std::to_string(n) + ": expected 4 tab-separated fields", n);
    }
    WnliRow row;
    row.index = f[0];
    row.premise = f[1];
    row.hypothesis = f[2];
    const std::string_view label = trim(f[3]);
    if (label == "0") {
      row.label = 0;
    } else if (label == "1") {
      row.label = 1;
    } else {
      throw DataError(path + ":" + std::to_string(n) + ": label must be 0 or 1", n, row.index);
    }
    rows.push_back(std::move(row));
  });
  return rows;
}

ordered_json WnliResult::to_json() const {
  ordered_json j;
  j["total"] = total;
  j["correct"] = correct;
  j["accuracy"] = accuracy;
  ordered_json skips = ordered_json::array();
  for (const WnliSkip& s : skipped) {
    skips.push_back(ordered_json{{"index", s.index}, {"reason", s.reason}});
  }
  j["skipped"] = std::move(skips);
  j["single_candidate"] = single_candidate;
  return j;
}

WnliResult evaluate_wnli(Scorer& scorer, const Vocab& vocab, const WnliTransformer& transformer,
                         std::span<const WnliRow> rows, const WnliOptions& options) {
  WnliResult result;
  std::vector<MaskedExample> examples;
  std::vector<int> labels;
  for (const WnliRow& row : rows) {
    try {
      WnliAlignment a = transformer.transform(row.premise, row.hypothesis, "wnli/" + row.index);
      if (a.example.candidates.size() < 2) {
        // Nothing to compare against, so the hypothesis is taken as entailed.
        result.single_candidate.push_back(row.index);
        ++result.total;
        if (row.label == 1) ++result.correct;
        continue;
      }
      examples.push_back(std::move(a.example));
      labels.push_back(row.label);
    } catch (const WnliAlignmentError& e) {
      result.skipped.push_back({row.index, e.what()});
      if (options.unalignable_counts_incorrect) ++result.total;
    }
  }

  const auto scores = score_examples(scorer, vocab, examples);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const std::size_t p = predict_one(examples[i], scores[i], options.shuffle_seed);
    const int predicted_label = p == 0 ? 1 : 0;
    ++result.total;
    if (predicted_label == labels[i]) ++result.correct;
  }
  result.accuracy = result.total == 0 ? 0.0
                                      : static_cast<double>(result.correct) /
                                            static_cast<double>(result.total);
  return result;
}

// --- Reports ------------------------------------------------------------

ReportRow to_row(const MetricsReport& report, std::string label) {
  ReportRow row;
  row.label = std::move(label);
  row.values = {report.overall.accuracy(),    report.non_associative.accuracy(),
                report.associative.accuracy(), report.unswitched.accuracy(),
                report.switched.accuracy(),    report.consistency(),
                report.wnli_accuracy};
  return row;
}

std::string render_table(std::span<const ReportRow> rows) {
  std::size_t label_width = 5;
  for (const ReportRow& r : rows) label_width = std::max(label_width, r.label.size());

  std::ostringstream out;
  auto pad_right = [&](const std::string& s, std::size_t w) {
    out << s << std::string(w > s.size() ? w - s.size() : 0, ' ');
  };
  auto pad_left = [&](const std::string& s, std::size_t w) {
    out << std::string(w > s.size() ? w - s.size() : 0, ' ') << s;
  };
  constexpr std::size_t kCell = 12;

  pad_right("model", label_width);
  for (std::string_view c : kReportColumns) pad_left(std::string(c), kCell);
  out << '\n';
  for (const ReportRow& r : rows) {
    pad_right(r.label, label_width);
    for (const auto& v : r.values) {
      if (!v) {
        pad_left("--", kCell);
        continue;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", *v);
      pad_left(buf, kCell);
    }
    out << '\n';
  }
  return out.str();
}

std::string render_report(const MetricsReport& report, const std::string& label) {
  const ReportRow row = to_row(report, label);
  return render_table(std::span<const ReportRow>(&row, 1));
}

}  // namespace wsckit
