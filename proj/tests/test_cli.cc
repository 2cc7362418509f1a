#include <doctest.h>

#include <fstream>

#include "test_util.h"
#include "wsckit/cli.h"
#include "wsckit/example.h"

using namespace testutil;
using nlohmann::json;

namespace {

std::string generate(const TempDir& d, const std::string& name,
                     const std::vector<std::string>& extra = {}) {
  std::vector<std::string> args = {"generate", "--corpus", kGoldenCorpus, "--out", d.file(name)};
  args.insert(args.end(), extra.begin(), extra.end());
  REQUIRE(cli(args) == 0);
  return d.file(name);
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(cli({"generate", "--corpus", kGoldenCorpus, "--out", "/tmp/x.jsonl", "--bogus"}) == 1);
  CHECK(cli({}) == 1);
  CHECK(cli({"frobnicate"}) == 1);
  CHECK(cli({"downsample", "--in", kGoldenDataset, "--out", "/tmp/x.jsonl", "--rate", "0.5"}) ==
        1);
  CHECK(cli({"downsample", "--in", "/nonexistent.jsonl", "--out", "/tmp/x.jsonl", "--rate", "0.5",
             "--seed", "1"}) == 1);
  CHECK(cli({"audit-sample", "--in", kGoldenDataset, "--out", "/nonexistent/dir/x.jsonl", "--n",
             "3", "--seed", "1"}) == 1);
  CHECK(cli({"--help"}) == 0);
}

TEST_CASE("generate writes the golden file and a manifest; reruns are byte-identical") {
  TempDir d("cli");
  const std::string a = generate(d, "a.jsonl");
  CHECK(wsckit::read_file(a) == wsckit::read_file(kGoldenDataset));
  const json m = json::parse(wsckit::read_file(a + ".manifest.json"));
  CHECK(m["subcommand"] == "generate");
  CHECK(m["config"]["format"] == "pretagged");
  CHECK(m["inputs"][0]["sha256"].get<std::string>().size() == 64);
  const std::string first_manifest = wsckit::read_file(a + ".manifest.json");
  generate(d, "a.jsonl", {"--format", "pretagged"});
  CHECK(wsckit::read_file(a) == wsckit::read_file(kGoldenDataset));
  CHECK(json::parse(wsckit::read_file(a + ".manifest.json"))["inputs"] == m["inputs"]);
  REQUIRE(cli({"--workers", "1", "generate", "--corpus", kGoldenCorpus, "--out", a}) == 0);
  CHECK(wsckit::read_file(a + ".manifest.json") == first_manifest);
}

TEST_CASE("plain corpus path") {
  TempDir d("cli");
  std::ofstream(d.file("c.txt")) << "The dog chased the cat because the dog was angry.\n"
                                    "Mr. Smith saw a bird. The bird sang to the cat.\n";
  REQUIRE(cli({"generate", "--corpus", d.file("c.txt"), "--format", "plain", "--out",
               d.file("o.jsonl")}) == 0);
  const auto data = wsckit::read_dataset(d.file("o.jsonl"));
  REQUIRE(!data.empty());
  CHECK(data[0].masked_text == "The dog chased the cat because the [MASK] was angry.");
}

TEST_CASE("data errors exit 2") {
  TempDir d("cli");
  std::ofstream(d.file("bad.jsonl")) << "{\"id\":\"x\"}\n";
  CHECK(cli({"downsample", "--in", d.file("bad.jsonl"), "--out", d.file("o.jsonl"), "--rate",
             "0.5", "--seed", "1"}) == 2);
  CHECK(cli({"split-pairs", "--in", kGoldenDataset, "--out", d.file("o.jsonl"), "--seed", "1"}) ==
        2);
  std::ofstream(d.file("labels.tsv")) << "a\tsomething\n";
  CHECK(cli({"audit-tally", "--labels", d.file("labels.tsv"), "--out", d.file("t.json")}) == 2);
  CHECK_FALSE(std::filesystem::exists(d.file("o.jsonl")));
}

TEST_CASE("scorer errors exit 3") {
  TempDir d("cli");
  CHECK(cli({"filter", "--in", kGoldenDataset, "--out", d.file("f.jsonl"), "--scorer",
             "exec:true"}) == 3);
  CHECK(cli({"score", "--in", kGoldenDataset, "--out", d.file("s.jsonl"), "--scorer",
             "tcp:127.0.0.1:1"}) == 3);
}

TEST_CASE("sampling subcommands are deterministic and config files work") {
  TempDir d("cli");
  REQUIRE(cli({"downsample", "--in", kGoldenDataset, "--out", d.file("a.jsonl"), "--rate", "0.5",
               "--seed", "7"}) == 0);
  REQUIRE(cli({"downsample", "--in", kGoldenDataset, "--out", d.file("b.jsonl"), "--rate", "0.5",
               "--seed", "7"}) == 0);
  CHECK(wsckit::read_file(d.file("a.jsonl")) == wsckit::read_file(d.file("b.jsonl")));

  std::ofstream(d.file("run.toml")) << "[downsample]\nrate = 0.5\nseed = 7\n";
  REQUIRE(cli({"--config", d.file("run.toml"), "downsample", "--in", kGoldenDataset, "--out",
               d.file("c.jsonl")}) == 0);
  CHECK(wsckit::read_file(d.file("c.jsonl")) == wsckit::read_file(d.file("a.jsonl")));

  REQUIRE(cli({"downsample", "--in", kGoldenDataset, "--out", d.file("s8.jsonl"), "--rate", "0.5",
               "--seed", "8"}) == 0);
  REQUIRE(cli({"--config", d.file("run.toml"), "downsample", "--in", kGoldenDataset, "--out",
               d.file("c8.jsonl"), "--seed", "8"}) == 0);
  CHECK(wsckit::read_file(d.file("c8.jsonl")) == wsckit::read_file(d.file("s8.jsonl")));

  REQUIRE(cli({"audit-sample", "--in", kGoldenDataset, "--out", d.file("s1.jsonl"), "--n", "5",
               "--seed", "3"}) == 0);
  REQUIRE(cli({"audit-sample", "--in", kGoldenDataset, "--out", d.file("s2.jsonl"), "--n", "5",
               "--seed", "3"}) == 0);
  CHECK(wsckit::read_file(d.file("s1.jsonl")) == wsckit::read_file(d.file("s2.jsonl")));
  CHECK(wsckit::read_dataset(d.file("s1.jsonl")).size() == 5);
}

TEST_CASE("filter and score: baseline and remote scorer agree, replay cache reruns match") {
  TempDir d("cli");
  const std::vector<std::string> base = {"--baseline-corpus", kGoldenCorpus};
  auto run = [&](std::string cmd, std::string out, std::vector<std::string> extra) {
    std::vector<std::string> args = {cmd, "--in", kGoldenDataset, "--out", d.file(out)};
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  };
  REQUIRE(run("filter", "f1.jsonl", base) == 0);
  REQUIRE(run("filter", "f2.jsonl", {"--scorer", serve_command(), "--replay-cache",
                                     d.file("cache.jsonl")}) == 0);
  CHECK(wsckit::read_file(d.file("f1.jsonl")) == wsckit::read_file(d.file("f2.jsonl")));
  const std::string data2 = wsckit::read_file(d.file("f2.jsonl"));
  const std::string manifest2 = wsckit::read_file(d.file("f2.jsonl.manifest.json"));
  REQUIRE(run("filter", "f2.jsonl", {"--scorer", serve_command(), "--replay-cache",
                                     d.file("cache.jsonl")}) == 0);
  CHECK(wsckit::read_file(d.file("f2.jsonl")) == data2);
  CHECK(wsckit::read_file(d.file("f2.jsonl.manifest.json")) == manifest2);
  const json stats = json::parse(wsckit::read_file(d.file("f1.jsonl.stats.json")));
  CHECK(stats["total"] == 40);

  REQUIRE(run("score", "s1.jsonl", base) == 0);
  REQUIRE(run("score", "s2.jsonl", {"--scorer", serve_command()}) == 0);
  CHECK(wsckit::read_file(d.file("s1.jsonl")) == wsckit::read_file(d.file("s2.jsonl")));
}

TEST_CASE("dedup, evaluation and audit wiring") {
  TempDir d("cli");
  REQUIRE(cli({"dedup", "--train", kGoldenDataset, "--eval", kData + "/wsc20.jsonl", "--out",
               d.file("dd.jsonl"), "--removed-out", d.file("removed.txt")}) == 0);
  const auto kept = wsckit::read_dataset(d.file("dd.jsonl"));
  const std::string removed = wsckit::read_file(d.file("removed.txt"));
  CHECK(kept.size() + std::count(removed.begin(), removed.end(), '\n') == 40);
  CHECK(kept.size() < 40);

  REQUIRE(cli({"eval-wsc", "--in", kData + "/wsc20.jsonl", "--annotations",
               kData + "/wsc20_annotations.jsonl", "--out", d.file("wsc.json"), "--table-out",
               d.file("wsc.txt"), "--wnli", kData + "/wnli_sample.tsv"}) == 0);
  const json r = json::parse(wsckit::read_file(d.file("wsc.json")));
  CHECK(r["overall"]["total"] == 20);
  CHECK(r["unswitched"]["total"] == 9);
  CHECK(r["wnli_detail"]["skipped"].size() == 1);
  CHECK(wsckit::read_file(d.file("wsc.txt")).find("WSC273") != std::string::npos);

  REQUIRE(cli({"eval-wnli", "--in", kData + "/wnli_sample.tsv", "--out", d.file("wnli.json"),
               "--unalignable", "exclude"}) == 0);
  CHECK(json::parse(wsckit::read_file(d.file("wnli.json")))["total"] == 4);

  std::ofstream(d.file("labels.tsv")) << "a\teasy\nb\tHard\nc\tnoise\nd\teasy\n";
  REQUIRE(cli({"audit-tally", "--labels", d.file("labels.tsv"), "--out", d.file("t.json")}) == 0);
  const json t = json::parse(wsckit::read_file(d.file("t.json")));
  CHECK(t.dump().find("easy") != std::string::npos);
}
