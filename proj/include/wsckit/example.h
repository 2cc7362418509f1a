#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace wsckit {

// One masked sentence with its candidate fillers. The correct filler is
// candidates[answer_idx]; every other candidate is a distractor.
struct MaskedExample {
  std::string id;
  std::string masked_text;  // contains "[MASK]" exactly once
  std::vector<std::string> candidates;
  std::size_t answer_idx = 0;
  std::optional<std::string> pair_id;
  std::string source;  // "<doc_id>#<sent_idx>" or a dataset name

  const std::string& answer() const { return candidates.at(answer_idx); }
  std::string filled(std::size_t candidate_idx) const;

  bool operator==(const MaskedExample&) const = default;
};

// Returns a description of the first violated invariant, or nullopt.
// Checks: one "[MASK]", at least two candidates, answer index in range,
// candidates distinct under match normalization.
std::optional<std::string> check_invariants(const MaskedExample& ex);

// One dataset record per line. Field order: id, masked_text, candidates,
// answer_idx, pair_id, source.
nlohmann::ordered_json to_json(const MaskedExample& ex);
MaskedExample example_from_json(const nlohmann::json& j);

std::string to_jsonl_line(const MaskedExample& ex);

// Throws DataError naming the line on malformed records or invariant
// violations.
std::vector<MaskedExample> read_dataset(const std::string& path);
void write_dataset(const std::string& path, const std::vector<MaskedExample>& examples);

}  // namespace wsckit
