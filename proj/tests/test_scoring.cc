#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "oracles.h"
#include "test_util.h"
#include "wsckit/error.h"
#include "wsckit/scoring.h"

using namespace wsckit;

namespace {

const Vocab& vocab() {
  static const Vocab v = Vocab::load(testutil::kVocab);
  return v;
}

UnigramScorer fitted() {
  return UnigramScorer::fit(vocab(), load_corpus(testutil::kGoldenCorpus, CorpusFormat::kPretagged),
                            1.0);
}

}  // namespace

TEST_CASE("request layout masks one slot per candidate piece") {
  const MaskedExample ex{"x", "The [MASK] was playing.", {"putters", "dog"}, 0, std::nullopt, "s"};
  const ScorerRequest r = build_request(vocab(), ex, 0);
  CHECK(r.id == "x/0");
  CHECK(r.pieces == std::vector<std::string>{"[CLS]", "the", "[MASK]", "[MASK]", "was", "play",
                                             "##ing", ".", "[SEP]"});
  CHECK(r.mask_positions == std::vector<std::size_t>{2, 3});
  CHECK(r.targets == std::vector<std::string>{"put", "##ters"});
  CHECK(build_request(vocab(), ex, 1).mask_positions == std::vector<std::size_t>{2});
  CHECK_THROWS_AS(build_request(vocab(), ex, 2), std::out_of_range);
}

TEST_CASE("request validation") {
  ScorerRequest r{"r", {"[CLS]", "[MASK]", "[SEP]"}, {1}, {"dog"}};
  CHECK_NOTHROW(validate_request(r));
  r.mask_positions = {3};
  CHECK_THROWS_AS(validate_request(r), ScorerError);
  r.mask_positions = {1, 1};
  r.targets = {"a", "b"};
  CHECK_THROWS_AS(validate_request(r), ScorerError);
  r.mask_positions = {1};
  CHECK_THROWS_AS(validate_request(r), ScorerError);
}

TEST_CASE("mean log prob propagates -inf") {
  const std::vector<double> a = {-1.0, -3.0};
  CHECK(mean_log_prob(a) == -2.0);
  const std::vector<double> b = {-1.0, kNegInf};
  CHECK(mean_log_prob(b) == kNegInf);
  const std::vector<double> c = {-1.0, std::nan("")};
  CHECK(mean_log_prob(c) == kNegInf);
}

TEST_CASE("baseline distribution sums to one") {
  const UnigramScorer s = fitted();
  long double sum = 0;
  for (std::size_t i = 0; i < vocab().size(); ++i) sum += std::exp(s.log_prob(i));
  CHECK(std::abs(static_cast<double>(sum) - 1.0) < 1e-9);
  CHECK(s.log_prob("[MASK]") == kNegInf);
  CHECK(s.log_prob("[UNK]") == kNegInf);
  CHECK(s.log_prob("not-a-piece") == kNegInf);
  const UnigramScorer u = UnigramScorer::uniform(vocab());
  CHECK(u.log_prob("dog") == u.log_prob("cat"));
}

TEST_CASE("joint masking equals the mean of single-position queries for a context-free scorer") {
  UnigramScorer s = fitted();
  for (const auto& ex : read_dataset(testutil::kGoldenDataset)) {
    for (std::size_t c = 0; c < ex.candidates.size(); ++c) {
      const auto joint = candidate_log_prob(s, vocab(), ex, c, MaskFilling::kJoint);
      const auto inc = candidate_log_prob(s, vocab(), ex, c, MaskFilling::kIncremental);
      CHECK(joint.piece_count == inc.piece_count);
      CHECK(joint.avg_log_prob == inc.avg_log_prob);
      const auto reqs = build_incremental_requests(vocab(), ex, c);
      CHECK(reqs.size() == joint.piece_count);
      std::vector<double> singles;
      for (const auto& r : reqs) singles.push_back(s.score(std::span(&r, 1))[0].log_probs[0]);
      CHECK(joint.avg_log_prob == mean_log_prob(singles));
    }
  }
}

TEST_CASE("parallel baseline scoring equals the serial reference") {
  UnigramScorer s = fitted();
  std::vector<ScorerRequest> reqs;
  for (int rep = 0; rep < 5; ++rep) {
    for (const auto& ex : read_dataset(testutil::kGoldenDataset)) {
      for (std::size_t c = 0; c < ex.candidates.size(); ++c) {
        auto r = build_request(vocab(), ex, c);
        r.id += "#" + std::to_string(rep);
        reqs.push_back(std::move(r));
      }
    }
  }
  REQUIRE(reqs.size() > 256);
  CHECK(s.score(reqs) == s.score_serial(reqs));
}

TEST_CASE("pair loss bounds and monotonicity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lp(-15.0, 0.0), al(0.0, 30.0), be(0.0, 1.0);
  const double h = 1e-4;
  for (int i = 0; i < 1000; ++i) {
    const double lc = lp(rng), li = lp(rng);
    const LossParams p{al(rng), be(rng)};
    const double l = pair_loss(lc, li, p);
    CHECK(l >= -lc);
    if (lc >= li + p.beta) CHECK(l == -lc);
    if (lc < li + p.beta && p.alpha > 0) CHECK(l > -lc);
    CHECK(pair_loss(lc + h, li, p) <= l);
    CHECK(pair_loss(lc, li + h, p) >= l);
  }
}

TEST_CASE("example loss: one correct term, margins summed over distractors") {
  const LossParams p{10.0, 0.2};
  const std::vector<double> two = {-2.0, -1.5};
  CHECK(example_loss(two, 0, p) == pair_loss(-2.0, -1.5, p));
  CHECK(example_loss(two, 1, p) == pair_loss(-1.5, -2.0, p));
  // -(-2) + 10 * (0.7 + 0 + 0.2)
  const std::vector<double> three = {-2.0, -1.5, -3.0, -2.0};
  CHECK(example_loss(three, 0, p) == doctest::Approx(2.0 + 10.0 * 0.9).epsilon(1e-12));
  CHECK_THROWS_AS(example_loss(three, 4, p), std::out_of_range);
}

TEST_CASE("prediction: argmax, shift invariance, ties, -inf") {
  const std::vector<double> s = {-3.0, -1.0, -2.0};
  CHECK(predict_from_scores(s) == 1);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10.0, 0.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(4);
    for (double& x : v) x = u(rng);
    std::vector<double> shifted = v;
    for (double& x : shifted) x += 2.5;
    std::vector<std::size_t> order = {2, 0, 3, 1};
    CHECK(predict_from_scores(v, order) == predict_from_scores(shifted, order));
  }
  const std::vector<double> tie = {-1.0, -1.0};
  CHECK(predict_from_scores(tie) == 0);
  const std::vector<std::size_t> rev = {1, 0};
  CHECK(predict_from_scores(tie, rev) == 1);
  const std::vector<double> inf = {kNegInf, -50.0};
  CHECK(predict_from_scores(inf) == 1);
  const std::vector<double> both = {kNegInf, kNegInf};
  CHECK(predict_from_scores(both, rev) == 1);
  const std::vector<double> nan = {std::nan(""), -5.0};
  CHECK(predict_from_scores(nan) == 1);
}

TEST_CASE("candidate order is a seeded permutation") {
  const MaskedExample ex{"x", "a [MASK] b", {"p", "q", "r", "s"}, 0, std::nullopt, "s"};
  CHECK(candidate_order(ex, std::nullopt) == std::vector<std::size_t>{0, 1, 2, 3});
  auto o = candidate_order(ex, 3);
  CHECK(o == candidate_order(ex, 3));
  std::sort(o.begin(), o.end());
  CHECK(o == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("score_examples batches into one scorer call") {
  std::map<std::string, double> table = {{"dog", -1.0}, {"cat", -2.0}};
  oracle::TableScorer t(table, vocab().digest());
  const auto data = read_dataset(testutil::kGoldenDataset);
  const auto scores = score_examples(t, vocab(), data);
  CHECK(t.calls == 1);
  CHECK(scores.size() == data.size());
  CHECK(scores[0][0].avg_log_prob == -1.0);
  CHECK(scores[0][1].avg_log_prob == -2.0);
}
