// Serial reference vs OpenMP kernel. Inputs are the golden fixture corpus
// replicated to a useful size.
#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "wsckit/corpus.h"
#include "wsckit/generator.h"
#include "wsckit/scoring.h"
#include "wsckit/tagger.h"
#include "wsckit/wordpiece.h"

namespace {

using namespace wsckit;

constexpr int kCopies = 200;

const std::string kCorpus = std::string(WSCKIT_BENCH_DATA) + "/golden_corpus.pretagged";
const std::string kVocab = std::string(WSCKIT_DATA_DIR) + "/vocab.txt";

const std::vector<SentenceRecord>& records() {
  static const std::vector<SentenceRecord> out = [] {
    const auto base = load_corpus(kCorpus, CorpusFormat::kPretagged);
    std::vector<SentenceRecord> all;
    for (int c = 0; c < kCopies; ++c) {
      for (SentenceRecord r : base) {
        r.doc_id += "-" + std::to_string(c);
        all.push_back(std::move(r));
      }
    }
    return all;
  }();
  return out;
}

const std::vector<MaskedExample>& examples() {
  static const std::vector<MaskedExample> out = generate_all_serial(records());
  return out;
}

const Vocab& vocab() {
  static const Vocab v = Vocab::load(kVocab);
  return v;
}

const std::vector<ScorerRequest>& requests() {
  static const std::vector<ScorerRequest> out = [] {
    std::vector<ScorerRequest> reqs;
    for (const MaskedExample& ex : examples()) {
      for (std::size_t i = 0; i < ex.candidates.size(); ++i) {
        reqs.push_back(build_request(vocab(), ex, i));
      }
    }
    return reqs;
  }();
  return out;
}

struct Documents {
  std::vector<std::string> ids;
  std::vector<std::string> texts;
};

const Documents& documents() {
  static const Documents out = [] {
    Documents d;
    std::string text;
    std::string current;
    for (const SentenceRecord& r : records()) {
      if (r.doc_id != current && !current.empty()) {
        d.ids.push_back(current);
        d.texts.push_back(std::move(text));
        text.clear();
      }
      current = r.doc_id;
      if (!text.empty()) text += ' ';
      text += detokenize(r.words);
    }
    d.ids.push_back(current);
    d.texts.push_back(std::move(text));
    return d;
  }();
  return out;
}

void BM_GenerateSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(generate_all_serial(records()));
  state.SetItemsProcessed(state.iterations() * records().size());
}

void BM_GenerateParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(generate_all(records()));
  state.SetItemsProcessed(state.iterations() * records().size());
}

void BM_DownsampleSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(downsample_mask_serial(examples(), 0.1, 7));
  state.SetItemsProcessed(state.iterations() * examples().size());
}

void BM_DownsampleParallel(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(downsample_mask(examples(), 0.1, 7));
  state.SetItemsProcessed(state.iterations() * examples().size());
}

void BM_ScoreSerial(benchmark::State& state) {
  const UnigramScorer scorer = UnigramScorer::uniform(vocab());
  for (auto _ : state) benchmark::DoNotOptimize(scorer.score_serial(requests()));
  state.SetItemsProcessed(state.iterations() * requests().size());
}

void BM_ScoreParallel(benchmark::State& state) {
  UnigramScorer scorer = UnigramScorer::uniform(vocab());
  for (auto _ : state) benchmark::DoNotOptimize(scorer.score(requests()));
  state.SetItemsProcessed(state.iterations() * requests().size());
}

void BM_ProcessSerial(benchmark::State& state) {
  const PosTagger tagger = PosTagger::load_default();
  const SentenceSegmenter segmenter;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        process_documents_serial(documents().ids, documents().texts, tagger, segmenter));
  }
  state.SetItemsProcessed(state.iterations() * documents().ids.size());
}

void BM_ProcessParallel(benchmark::State& state) {
  const PosTagger tagger = PosTagger::load_default();
  const SentenceSegmenter segmenter;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        process_documents(documents().ids, documents().texts, tagger, segmenter));
  }
  state.SetItemsProcessed(state.iterations() * documents().ids.size());
}

BENCHMARK(BM_GenerateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DownsampleSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DownsampleParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProcessSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ProcessParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
