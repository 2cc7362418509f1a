#include "wsckit/generator.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "wsckit/error.h"
#include "wsckit/hash.h"
#include "wsckit/text.h"
#include "wsckit/wordpiece.h"

namespace wsckit {

namespace {

struct NounGroup {
  std::string key;
  std::vector<std::size_t> positions;
};

std::string overlap_key(const MaskedExample& ex) {
  std::vector<std::string> cands;
  cands.reserve(ex.candidates.size());
  for (const std::string& c : ex.candidates) cands.push_back(match_normalize(c));
  std::sort(cands.begin(), cands.end());
  std::string key = match_normalize(ex.masked_text);
  for (const std::string& c : cands) {
    key.push_back('\x1f');
    key += c;
  }
  return key;
}

}  // namespace

std::string source_text(const SentenceRecord& record) { return detokenize(record.words); }

std::vector<MaskedExample> generate_examples(const SentenceRecord& record) {
  for (const std::string& w : record.words) {
    if (w.find(kMaskToken) != std::string::npos) return {};
  }

  std::vector<NounGroup> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t pos : noun_positions(record)) {
    const std::string& word = record.words[pos];
    if (!has_alnum(word)) continue;
    std::string key = to_lower_ascii(word);
    auto [it, inserted] = group_of.emplace(key, groups.size());
    if (inserted) groups.push_back(NounGroup{std::move(key), {}});
    groups[it->second].positions.push_back(pos);
  }

  std::vector<MaskedExample> out;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const NounGroup& group = groups[g];
    if (group.positions.size() < 2 || groups.size() < 2) continue;
    const std::size_t masked = group.positions[1];

    MaskedExample ex;
    ex.candidates.push_back(record.words[group.positions[0]]);
    // Groups are in first-occurrence order, so distractors come out in
    // sentence order.
    for (std::size_t other = 0; other < groups.size(); ++other) {
      if (other != g) ex.candidates.push_back(record.words[groups[other].positions[0]]);
    }
    ex.answer_idx = 0;

    std::vector<std::string> words = record.words;
    words[masked] = std::string(kMaskToken);
    ex.masked_text = detokenize(words);
    ex.id = stable_digest({record.doc_id, std::to_string(record.sent_idx), group.key,
                           std::to_string(masked)});
    ex.source = record.doc_id + "#" + std::to_string(record.sent_idx);
    out.push_back(std::move(ex));
  }
  // Groups are in first-occurrence order; the masked (second) occurrences
  // need not be.
  std::stable_sort(out.begin(), out.end(), [](const MaskedExample& a, const MaskedExample& b) {
    return a.masked_text.find(kMaskToken) < b.masked_text.find(kMaskToken);
  });
  return out;
}

std::vector<MaskedExample> generate_all_serial(std::span<const SentenceRecord> records) {
  std::vector<MaskedExample> out;
  for (const SentenceRecord& r : records) {
    for (MaskedExample& ex : generate_examples(r)) out.push_back(std::move(ex));
  }
  return out;
}

std::vector<MaskedExample> generate_all(std::span<const SentenceRecord> records) {
  const auto n = static_cast<std::ptrdiff_t>(records.size());
  std::vector<std::vector<MaskedExample>> per_record(records.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) per_record[i] = generate_examples(records[i]);
  std::vector<MaskedExample> out;
  for (auto& v : per_record) {
    for (MaskedExample& ex : v) out.push_back(std::move(ex));
  }
  return out;
}

bool round_trips(const MaskedExample& ex, std::string_view source) {
  const std::size_t slot = ex.masked_text.find(kMaskToken);
  if (slot == std::string::npos || ex.answer_idx >= ex.candidates.size()) return false;
  const std::string_view prefix = std::string_view(ex.masked_text).substr(0, slot);
  const std::string_view suffix = std::string_view(ex.masked_text).substr(slot + kMaskToken.size());
  const std::string& answer = ex.candidates[ex.answer_idx];
  if (source.size() != prefix.size() + answer.size() + suffix.size()) return false;
  if (!source.starts_with(prefix) || !source.ends_with(suffix)) return false;
  return to_lower_ascii(source.substr(prefix.size(), answer.size())) == to_lower_ascii(answer);
}

bool keep_in_sample(std::string_view id, double rate, std::uint64_t seed) {
  if (rate >= 1.0) return true;
  if (!(rate > 0.0)) return false;
  const auto threshold = static_cast<std::uint64_t>(std::ldexp(rate, 64));
  return seeded_hash(seed, id) < threshold;
}

std::vector<char> downsample_mask_serial(std::span<const MaskedExample> examples, double rate,
                                         std::uint64_t seed) {
  std::vector<char> keep(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    keep[i] = keep_in_sample(examples[i].id, rate, seed) ? 1 : 0;
  }
  return keep;
}

std::vector<char> downsample_mask(std::span<const MaskedExample> examples, double rate,
                                  std::uint64_t seed) {
  const auto n = static_cast<std::ptrdiff_t>(examples.size());
  std::vector<char> keep(examples.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    keep[i] = keep_in_sample(examples[i].id, rate, seed) ? 1 : 0;
  }
  return keep;
}

std::vector<MaskedExample> downsample(std::span<const MaskedExample> examples, double rate,
                                      std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0)) {
    throw std::invalid_argument("keep rate must be in (0, 1]");
  }
  const std::vector<char> keep = downsample_mask(examples, rate, seed);
  std::vector<MaskedExample> out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (keep[i]) out.push_back(examples[i]);
  }
  return out;
}

std::vector<MaskedExample> split_pairs(std::span<const MaskedExample> dataset,
                                       PairSplitMode mode, std::uint64_t seed) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> members;
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dataset[i].pair_id) {
      problems.push_back("example " + dataset[i].id + " has no pair_id");
      continue;
    }
    auto [it, inserted] = members.try_emplace(*dataset[i].pair_id);
    if (inserted) order.push_back(*dataset[i].pair_id);
    it->second.push_back(i);
  }
  for (const std::string& pid : order) {
    if (members[pid].size() != 2) {
      problems.push_back("pair " + pid + " has " + std::to_string(members[pid].size()) +
                         " members");
    }
  }
  if (!problems.empty()) {
    std::string msg = "split_pairs: incomplete pairs:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw DataError(msg);
  }

  std::vector<char> keep(dataset.size(), 0);
  if (mode == PairSplitMode::kNoPairs) {
    for (const std::string& pid : order) {
      const std::size_t pick = seeded_hash(seed, pid) & 1U;
      keep[members[pid][pick]] = 1;
    }
  } else {
    std::vector<std::pair<std::uint64_t, std::string>> ranked;
    ranked.reserve(order.size());
    for (const std::string& pid : order) {
      ranked.emplace_back(seeded_hash(seed, "half-pairs\x1f" + pid), pid);
    }
    std::sort(ranked.begin(), ranked.end());
    for (std::size_t k = 0; k < ranked.size() / 2; ++k) {
      for (std::size_t idx : members[ranked[k].second]) keep[idx] = 1;
    }
  }

  std::vector<MaskedExample> out;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (keep[i]) out.push_back(dataset[i]);
  }
  return out;
}

OverlapResult remove_overlap(std::span<const MaskedExample> train,
                             std::span<const MaskedExample> eval) {
  std::unordered_set<std::string> eval_keys;
  for (const MaskedExample& ex : eval) eval_keys.insert(overlap_key(ex));
  OverlapResult result;
  for (const MaskedExample& ex : train) {
    if (eval_keys.count(overlap_key(ex))) {
      result.removed_ids.push_back(ex.id);
    } else {
      result.kept.push_back(ex);
    }
  }
  return result;
}

}  // namespace wsckit
