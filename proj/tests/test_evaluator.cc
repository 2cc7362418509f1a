#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "oracles.h"
#include "test_util.h"
#include "wsckit/error.h"
#include "wsckit/evaluator.h"

using namespace wsckit;
using nlohmann::json;

namespace {

const Vocab& vocab() {
  static const Vocab v = Vocab::load(testutil::kVocab);
  return v;
}

const WnliTransformer& transformer() {
  static const PosTagger tagger = PosTagger::load_default();
  static const WnliTransformer t(
      tagger, load_abbreviations(std::string(WSCKIT_DATA_DIR) + "/abbreviations.txt"));
  return t;
}

MaskedExample two(std::string id, std::string a, std::string b, std::size_t answer) {
  return {std::move(id), "x [MASK] y", {std::move(a), std::move(b)}, answer, std::nullopt, "t"};
}

WscAnnotation ann(std::string id, bool assoc, bool sw, std::size_t sw_answer = 0) {
  WscAnnotation a{std::move(id), assoc, sw, std::nullopt, std::nullopt};
  if (sw) {
    a.switched_text = "y [MASK] x";
    a.switched_answer_idx = sw_answer;
  }
  return a;
}

}  // namespace

TEST_CASE("annotation records enforce switched_text iff switchable") {
  CHECK_NOTHROW(annotation_from_json(json::parse(
      R"({"example_id":"a","associative":true,"switchable":false,"switched_text":null})")));
  CHECK_THROWS_AS(annotation_from_json(json::parse(
                      R"({"example_id":"a","switchable":true,"switched_text":null})")),
                  DataError);
  CHECK_THROWS_AS(annotation_from_json(json::parse(
                      R"({"example_id":"a","switchable":false,"switched_text":"t [MASK]"})")),
                  DataError);
  const auto fixture = read_annotations(testutil::kData + "/wsc20_annotations.jsonl");
  CHECK(fixture.size() == 20);
}

TEST_CASE("consistency") {
  const std::vector<std::string> a = {"trophy", "Paul"}, b = {"suitcase", "George"};
  CHECK(consistency(a, b) == 1.0);
  CHECK(consistency(a, a) == 0.0);
  const std::vector<std::string> c = {"Trophy ", "paul"};
  CHECK(consistency(a, c) == 0.0);  // party identity, not surface
  const std::vector<std::string> shorter = {"x"};
  CHECK_THROWS_AS(consistency(a, shorter), std::invalid_argument);
  const std::vector<bool> yes = {true, true}, mixed = {true, false};
  CHECK(consistency(a, b, yes, mixed, ConsistencyRule::kFlipAndCorrect) == 0.5);
  CHECK(consistency(a, b, yes, mixed, ConsistencyRule::kFlip) == 1.0);

  std::mt19937_64 rng(1);
  const std::vector<std::string> names = {"a", "b", "c"};
  for (int t = 0; t < 100; ++t) {
    std::vector<std::string> x, y;
    for (int i = 0; i < 7; ++i) {
      x.push_back(names[rng() % 3]);
      y.push_back(names[rng() % 3]);
    }
    CHECK(consistency(x, y) == consistency(y, x));
  }
}

TEST_CASE("4-example set: aggregate equals the brute-force recount over all outcomes") {
  const std::vector<MaskedExample> ex = {two("e1", "a", "b", 0), two("e2", "c", "d", 1),
                                         two("e3", "e", "f", 0), two("e4", "g", "h", 1)};
  const std::vector<WscAnnotation> an = {ann("e1", true, true, 1), ann("e2", false, true, 0),
                                         ann("e3", false, false), ann("e4", true, false)};
  for (unsigned bits = 0; bits < 64; ++bits) {
    std::vector<std::size_t> pred(4), pred_sw(4, 0);
    for (int i = 0; i < 4; ++i) pred[i] = (bits >> i) & 1;
    pred_sw[0] = (bits >> 4) & 1;
    pred_sw[1] = (bits >> 5) & 1;
    std::vector<WscOutcome> outcomes;
    for (int i = 0; i < 4; ++i) {
      WscOutcome o;
      o.example_id = ex[i].id;
      o.associative = an[i].associative;
      o.predicted = pred[i];
      o.correct = pred[i] == ex[i].answer_idx;
      if (an[i].switchable) {
        o.predicted_party = ex[i].candidates[pred[i]];
        o.switched_party = ex[i].candidates[pred_sw[i]];
        o.switched_correct = pred_sw[i] == *an[i].switched_answer_idx;
      }
      outcomes.push_back(o);
    }
    const oracle::Recount want = oracle::recount(ex, an, pred, pred_sw);
    const MetricsReport got = aggregate_wsc(outcomes, ConsistencyRule::kFlip);
    CHECK(got.overall.correct == want.correct);
    CHECK(got.associative.correct == want.assoc_correct);
    CHECK(got.non_associative.correct == want.nonassoc_correct);
    CHECK(got.unswitched.correct == want.unsw_correct);
    CHECK(got.switched.correct == want.sw_correct);
    CHECK(got.consistent == want.flips);
    CHECK(aggregate_wsc(outcomes, ConsistencyRule::kFlipAndCorrect).consistent ==
          want.flips_correct);
    CHECK(got.overall.correct == got.associative.correct + got.non_associative.correct);
    CHECK(got.overall.total == got.associative.total + got.non_associative.total);
    CHECK(got.unswitched.total == 2);
  }
}

TEST_CASE("all-correct predictions give accuracy 1") {
  std::map<std::string, double> table = {{"a", -1.0}, {"b", -5.0}, {"c", -5.0}, {"d", -1.0}};
  oracle::TableScorer t(table, vocab().digest());
  const Vocab v = Vocab::from_pieces({"[MASK]", "[UNK]", "[CLS]", "[SEP]", "a", "b", "c", "d",
                                      "x", "y"});
  const std::vector<MaskedExample> ex = {two("e1", "a", "b", 0), two("e2", "c", "d", 1)};
  const std::vector<WscAnnotation> an = {ann("e1", true, false), ann("e2", false, false)};
  std::vector<WscOutcome> outcomes;
  const MetricsReport r = evaluate_wsc(t, v, ex, an, {}, &outcomes);
  CHECK(r.overall.accuracy() == 1.0);
  CHECK(r.associative.accuracy() == 1.0);
  CHECK(r.non_associative.accuracy() == 1.0);
  CHECK_FALSE(r.consistency());
  CHECK(outcomes.size() == 2);
  CHECK(t.calls == 1);
}

TEST_CASE("missing annotation names the example") {
  UnigramScorer s = UnigramScorer::uniform(vocab());
  const auto data = read_dataset(testutil::kData + "/wsc20.jsonl");
  auto an = read_annotations(testutil::kData + "/wsc20_annotations.jsonl");
  an.erase(an.begin() + 4);
  try {
    evaluate_wsc(s, vocab(), data, an);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(e.record_id() == "wsc-05");
    CHECK(std::string(e.what()).find("wsc-05") != std::string::npos);
  }
}

TEST_CASE("wnli transform") {
  const auto a = transformer().transform("It rained, so it was wet.", "The garden was wet.");
  CHECK(a.example.masked_text == "It rained, so [MASK] was wet.");
  CHECK(a.example.candidates == std::vector<std::string>{"The garden"});

  const auto b = transformer().transform(
      "Paul tried to call George on the phone, but he wasn't available.",
      "George wasn't available.");
  CHECK(b.pronoun == "he");
  CHECK(b.example.candidates == std::vector<std::string>{"George", "Paul", "phone"});
  CHECK(wnli_round_trips(b, "George wasn't available."));

  try {
    transformer().transform("The dog barked.", "The weather was nice.");
    FAIL("expected an error");
  } catch (const WnliAlignmentError& e) {
    CHECK(e.kind() == WnliAlignmentError::Kind::kNoAlignment);
  }
  try {
    transformer().transform("It was red and it was red.", "The ball was red.");
    FAIL("expected an error");
  } catch (const WnliAlignmentError& e) {
    CHECK(e.kind() == WnliAlignmentError::Kind::kAmbiguous);
  }
}

TEST_CASE("wnli round trip on every alignable sample row") {
  for (const auto& row : read_wnli_tsv(testutil::kData + "/wnli_sample.tsv")) {
    try {
      const auto a = transformer().transform(row.premise, row.hypothesis);
      CHECK(wnli_round_trips(a, row.hypothesis));
      CHECK(wnli_normalize(row.hypothesis) == wnli_normalize(row.hypothesis + " "));
    } catch (const WnliAlignmentError&) {
      CHECK(row.index == "3");
    }
  }
}

TEST_CASE("wnli scoring rule and unalignable handling") {
  std::map<std::string, double> table = {{"the", -1.0}, {"trophy", -1.0}, {"suitcase", -5.0}};
  oracle::TableScorer t(table, vocab().digest());
  const std::string premise = "The trophy didn't fit into the suitcase because it was too large.";
  std::vector<WnliRow> rows = {{"0", premise, "The trophy was too large.", 1},
                               {"1", premise, "The trophy was too large.", 0},
                               {"2", premise, "Nothing matches here.", 1}};
  WnliResult r = evaluate_wnli(t, vocab(), transformer(), rows);
  CHECK(r.total == 3);
  CHECK(r.correct == 1);
  CHECK(r.skipped.size() == 1);
  WnliOptions exclude;
  exclude.unalignable_counts_incorrect = false;
  r = evaluate_wnli(t, vocab(), transformer(), rows, exclude);
  CHECK(r.total == 2);
  CHECK(r.accuracy == 0.5);
  CHECK(r.skipped.size() == 1);
}

TEST_CASE("wnli reader rejects malformed rows") {
  testutil::TempDir d("wnli");
  std::ofstream(d.file("bad.tsv")) << "index\tsentence1\tsentence2\tlabel\n0\ta\tb\t1\n1\ta\tb\n";
  try {
    read_wnli_tsv(d.file("bad.tsv"));
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(e.line() == 3);
  }
  std::ofstream(d.file("label.tsv")) << "h\n0\ta\tb\t2\n";
  CHECK_THROWS_AS(read_wnli_tsv(d.file("label.tsv")), DataError);
}

TEST_CASE("report rendering") {
  MetricsReport r;
  r.overall = {4, 3};
  r.non_associative = {3, 2};
  r.associative = {1, 1};
  r.unswitched = {2, 1};
  r.switched = {2, 2};
  r.consistency_pairs = 2;
  r.consistent = 1;
  std::string text = render_report(r, "m");
  CHECK(text.find("0.750") != std::string::npos);
  CHECK(text.find("--") != std::string::npos);
  r.wnli_accuracy = 0.7251;
  text = render_report(r, "m");
  CHECK(text.find("0.725") != std::string::npos);
  CHECK(text.find("--") == std::string::npos);
  const std::string row = text.substr(text.find('\n') + 1);
  std::istringstream s(row);
  std::vector<std::string> fields;
  for (std::string f; s >> f;) fields.push_back(f);
  CHECK(fields.size() == 8);

  const auto j = r.to_json();
  CHECK(j["overall"]["accuracy"] == 0.75);
  CHECK(j["consistency"] == 0.5);
}
