#include "wsckit/example.h"

#include <unordered_set>

#include "wsckit/error.h"
#include "wsckit/io.h"
#include "wsckit/text.h"
#include "wsckit/wordpiece.h"

namespace wsckit {

std::string MaskedExample::filled(std::size_t candidate_idx) const {
  std::string out = masked_text;
  const std::size_t pos = out.find(kMaskToken);
  if (pos == std::string::npos) return out;
  out.replace(pos, kMaskToken.size(), candidates.at(candidate_idx));
  return out;
}

std::optional<std::string> check_invariants(const MaskedExample& ex) {
  const std::size_t masks = count_occurrences(ex.masked_text, kMaskToken);
  if (masks != 1) {
    return "masked_text contains [MASK] " + std::to_string(masks) + " times";
  }
  if (ex.candidates.size() < 2) return std::string("fewer than two candidates");
  if (ex.answer_idx >= ex.candidates.size()) return std::string("answer_idx out of range");
  std::unordered_set<std::string> seen;
  for (const std::string& c : ex.candidates) {
    if (trim(c).empty()) return std::string("empty candidate");
    if (!seen.insert(match_normalize(c)).second) return "duplicate candidate '" + c + "'";
  }
  return std::nullopt;
}

nlohmann::ordered_json to_json(const MaskedExample& ex) {
  nlohmann::ordered_json j;
  j["id"] = ex.id;
  j["masked_text"] = ex.masked_text;
  j["candidates"] = ex.candidates;
  j["answer_idx"] = ex.answer_idx;
  j["pair_id"] = ex.pair_id ? nlohmann::ordered_json(*ex.pair_id) : nlohmann::ordered_json();
  j["source"] = ex.source;
  return j;
}

MaskedExample example_from_json(const nlohmann::json& j) {
  MaskedExample ex;
  ex.id = j.at("id").get<std::string>();
  ex.masked_text = j.at("masked_text").get<std::string>();
  ex.candidates = j.at("candidates").get<std::vector<std::string>>();
  ex.answer_idx = j.at("answer_idx").get<std::size_t>();
  if (j.contains("pair_id") && !j.at("pair_id").is_null()) {
    ex.pair_id = j.at("pair_id").get<std::string>();
  }
  if (j.contains("source")) ex.source = j.at("source").get<std::string>();
  return ex;
}

std::string to_jsonl_line(const MaskedExample& ex) { return to_json(ex).dump(); }

std::vector<MaskedExample> read_dataset(const std::string& path) {
  std::vector<MaskedExample> out;
  for_each_line(path, [&](std::string_view line, std::size_t n) {
    if (trim(line).empty()) return;
    MaskedExample ex;
    try {
      ex = example_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(n) + ": malformed record: " + e.what(), n);
    }
    if (auto problem = check_invariants(ex)) {
      throw DataError(path + ":" + std::to_string(n) + ": record " + ex.id + ": " + *problem,
                      n, ex.id);
    }
    out.push_back(std::move(ex));
  });
  return out;
}

void write_dataset(const std::string& path, const std::vector<MaskedExample>& examples) {
  AtomicFile f(path);
  for (const MaskedExample& ex : examples) f.stream() << to_jsonl_line(ex) << '\n';
  f.commit();
}

}  // namespace wsckit
