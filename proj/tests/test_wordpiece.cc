#include <doctest.h>

#include <fstream>
#include <random>
#include <set>

#include "oracles.h"
#include "test_util.h"
#include "wsckit/error.h"
#include "wsckit/wordpiece.h"

using namespace wsckit;

namespace {

Vocab toy() {
  return Vocab::from_pieces({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "i", "like", "play",
                             "##ing", "dog", "."});
}

std::string write_vocab(const testutil::TempDir& d, const std::string& body) {
  const std::string p = d.file("vocab.txt");
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_CASE("vocab load") {
  testutil::TempDir d("vocab");
  const Vocab v = Vocab::load(write_vocab(d, "[MASK]\n[UNK]\n[CLS]\n[SEP]\ndog\n"));
  CHECK(v.size() == 5);
  CHECK(*v.id("dog") == 4);
  CHECK(v.digest().size() == 64);
  CHECK_THROWS_AS(Vocab::load(write_vocab(d, "[UNK]\n[CLS]\n[SEP]\ndog\n")), DataError);
  CHECK_THROWS_AS(Vocab::load(write_vocab(d, "[MASK]\n[UNK]\n[CLS]\n[SEP]\ndog\ndog\n")),
                  DataError);
  CHECK(Vocab::load(write_vocab(d, "[MASK]  \n[UNK]\n[CLS]\n[SEP]\ndog\n")).digest() ==
        Vocab::load(write_vocab(d, "[MASK]\n[UNK]\n[CLS]\n[SEP]\ndog\n")).digest());
}

TEST_CASE("tokenize_word") {
  const Vocab v = toy();
  CHECK(tokenize_word(v, "playing") == std::vector<std::string>{"play", "##ing"});
  CHECK(tokenize_word(v, "play") == std::vector<std::string>{"play"});
  CHECK(tokenize_word(v, "qxz") == std::vector<std::string>{"[UNK]"});
  CHECK(tokenize_word(v, "Dog") == std::vector<std::string>{"dog"});
  CHECK(tokenize_word(v, "[MASK]") == std::vector<std::string>{"[MASK]"});
}

TEST_CASE("whole-word fraction") {
  const Vocab v = toy();
  CHECK(whole_word_fraction(v, "I like playing") == 0.5);
  CHECK(whole_word_fraction(v, "I like playing", WholeWordDenominator::kWords) ==
        doctest::Approx(2.0 / 3.0));
  CHECK(whole_word_fraction(v, "I like dog.") == 1.0);
  CHECK(whole_word_fraction(v, "playing") == 0.0);
  CHECK(whole_word_fraction(v, "qxz dog") == 0.5);
  CHECK_THROWS_AS(whole_word_fraction(v, ""), std::invalid_argument);
}

TEST_CASE("greedy longest match agrees with brute force on random vocabularies") {
  std::mt19937_64 rng(17);
  const std::string alphabet = "abcd";
  auto rand_str = [&](std::size_t max_len) {
    std::string s;
    const std::size_t len = 1 + rng() % max_len;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> pieces = {"[MASK]", "[UNK]", "[CLS]", "[SEP]"};
    std::set<std::string> seen(pieces.begin(), pieces.end());
    for (int i = 0; i < 12; ++i) {
      std::string p = (rng() % 2 ? "##" : "") + rand_str(3);
      if (seen.insert(p).second) pieces.push_back(p);
    }
    const Vocab v = Vocab::from_pieces(pieces);
    for (int w = 0; w < 20; ++w) {
      const std::string word = rand_str(7);
      const auto got = tokenize_word(v, word);
      CHECK(got == oracle::wordpiece(v, word));
      if (got != std::vector<std::string>{"[UNK]"}) {
        std::string joined;
        for (const auto& p : got) joined += p.starts_with("##") ? p.substr(2) : p;
        CHECK(joined == word);
      }
    }
  }
}

TEST_CASE("whole-word fraction is 1 iff every word is one known piece") {
  const Vocab v = toy();
  for (const std::string text : {"i like dog", "dog .", "playing dog", "qxz", "i i i"}) {
    bool all_whole = true;
    for (const auto& w : basic_tokenize(text)) {
      const auto p = tokenize_word(v, w);
      all_whole = all_whole && p.size() == 1 && p[0] != "[UNK]";
    }
    CHECK((whole_word_fraction(v, text) == 1.0) == all_whole);
  }
}
