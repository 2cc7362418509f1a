#include "wsckit/tagger.h"

#include <array>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "wsckit/error.h"
#include "wsckit/text.h"

namespace wsckit {

namespace {

bool is_closed_class(std::string_view tag) {
  static const std::array<std::string_view, 17> kClosed = {
      "DT", "IN", "CC", "PRP", "PRP$", "MD", "TO", "WDT", "WP",
      "WP$", "WRB", "EX", "PDT", "RP", "POS", "CD", "UH"};
  for (std::string_view t : kClosed) {
    if (t == tag) return true;
  }
  return false;
}

bool is_number(std::string_view w) {
  bool digit = false;
  for (char c : w) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != ',' && c != '.' && c != '-' && c != '/' && c != ':') {
      return false;
    }
  }
  return digit;
}

bool all_punct(std::string_view w) {
  for (char c : w) {
    if (!is_ascii_punct(c)) return false;
  }
  return !w.empty();
}

std::string punct_tag(std::string_view w, int& open_quotes) {
  if (w == "." || w == "!" || w == "?") return ".";
  if (w == ",") return ",";
  if (w == ":" || w == ";" || w == "..." || w == "-" || w == "--") return ":";
  if (w == "(" || w == "[" || w == "{") return "-LRB-";
  if (w == ")" || w == "]" || w == "}") return "-RRB-";
  if (w == "``" || w == "`") return "``";
  if (w == "''" || w == "'") return "''";
  if (w == "\"") return (open_quotes++ % 2 == 0) ? "``" : "''";
  if (w == "$") return "$";
  if (w == "#") return "#";
  return "SYM";
}

bool ends_with_any(std::string_view w, std::initializer_list<std::string_view> suffixes,
                   std::size_t min_stem = 2) {
  for (std::string_view s : suffixes) {
    if (w.size() >= s.size() + min_stem && w.ends_with(s)) return true;
  }
  return false;
}

// Empty result means no suffix rule fired.
std::string suffix_tag(std::string_view lower) {
  if (ends_with_any(lower, {"ing"})) return "VBG";
  if (ends_with_any(lower, {"ed"})) return "VBD";
  if (ends_with_any(lower, {"ly"})) return "RB";
  if (ends_with_any(lower, {"tion", "sion", "ment", "ness", "ity", "ism", "ship", "hood",
                            "ance", "ence", "ist"})) {
    return "NN";
  }
  if (ends_with_any(lower, {"ous", "ful", "able", "ible", "ive", "less", "ic", "ish", "ary",
                            "al"})) {
    return "JJ";
  }
  if (lower.size() > 3 && lower.ends_with('s') && !lower.ends_with("ss") &&
      !lower.ends_with("us") && !lower.ends_with("is")) {
    return "NNS";
  }
  return {};
}

}  // namespace

PosTagger PosTagger::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing tagger model file " + path);
  std::unordered_map<std::string, std::string> lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::size_t tab = t.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 == t.size()) {
      throw DataError("malformed lexicon entry in " + path, line_no);
    }
    lexicon.emplace(std::string(t.substr(0, tab)), std::string(trim(t.substr(tab + 1))));
  }
  return PosTagger(std::move(lexicon));
}

PosTagger PosTagger::load_default() {
  return load(std::string(WSCKIT_DATA_DIR) + "/tagger_lexicon.tsv");
}

std::vector<std::string> PosTagger::tag(const std::vector<std::string>& words) const {
  if (words.empty()) throw std::invalid_argument("tag: empty word list");
  std::vector<std::string> tags;
  tags.reserve(words.size());
  int open_quotes = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    tags.push_back(tag_word(words, i, open_quotes));
  }
  return tags;
}

std::string PosTagger::tag_word(const std::vector<std::string>& words, std::size_t i,
                                int& open_quotes) const {
  const std::string& w = words[i];
  if (all_punct(w) && !lexicon_.count(w)) return punct_tag(w, open_quotes);
  if (is_number(w)) return "CD";

  const bool capitalized = is_ascii_upper(w.front());
  const bool sentence_initial =
      i == 0 || (i > 0 && (words[i - 1] == "``" || words[i - 1] == "\"" ||
                           words[i - 1] == "(" || words[i - 1] == ":"));
  const std::string lower = to_lower_ascii(w);

  if (auto it = lexicon_.find(w); it != lexicon_.end()) return it->second;
  if (auto it = lexicon_.find(lower); it != lexicon_.end()) {
    const std::string& tag = it->second;
    if (capitalized && !sentence_initial && !is_closed_class(tag)) {
      return tag == "NNS" ? "NNPS" : "NNP";
    }
    return tag;
  }

  if (capitalized) {
    if (sentence_initial) {
      std::string by_suffix = suffix_tag(lower);
      if (!by_suffix.empty() && by_suffix != "NN" && by_suffix != "NNS") return by_suffix;
    }
    return "NNP";
  }
  std::string by_suffix = suffix_tag(lower);
  return by_suffix.empty() ? "NN" : by_suffix;
}

}  // namespace wsckit
