#include "wsckit/cli.h"

#include <omp.h>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wsckit/corpus.h"
#include "wsckit/error.h"
#include "wsckit/evaluator.h"
#include "wsckit/example.h"
#include "wsckit/filter.h"
#include "wsckit/generator.h"
#include "wsckit/hash.h"
#include "wsckit/io.h"
#include "wsckit/protocol.h"
#include "wsckit/scoring.h"
#include "wsckit/tagger.h"
#include "wsckit/wordpiece.h"

namespace wsckit {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

const std::string kDataDir = WSCKIT_DATA_DIR;

const CLI::Validator kWritablePath(
    [](std::string& path) -> std::string {
      const fs::path parent = fs::path(path).parent_path();
      if (!parent.empty() && !fs::is_directory(parent)) {
        return "output directory does not exist: " + parent.string();
      }
      return {};
    },
    "PATH");

ordered_json finite_or_null(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

// Options of a subcommand in declaration order, as given or defaulted.
ordered_json options_json(const CLI::App& sub) {
  ordered_json j = ordered_json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      if (results.size() == 1) {
        j[name] = results.front();
      } else {
        j[name] = results;
      }
    } else if (!opt->get_default_str().empty()) {
      j[name] = opt->get_default_str();
    } else {
      j[name] = nullptr;
    }
  }
  return j;
}

struct Manifest {
  Manifest(const CLI::App& s, std::vector<std::string> in,
           std::optional<std::uint64_t> sd = std::nullopt)
      : sub(&s), inputs(std::move(in)), seed(sd) {}

  const CLI::App* sub;
  std::vector<std::string> inputs;
  std::optional<std::uint64_t> seed;
  std::string scorer;
  ordered_json extra = ordered_json::object();

  void write(const std::string& out) const {
    ordered_json j;
    j["subcommand"] = sub->get_name();
    j["config"] = options_json(*sub);
    j["seed"] = seed ? ordered_json(*seed) : ordered_json(nullptr);
    ordered_json in = ordered_json::array();
    for (const std::string& p : inputs) {
      in.push_back(ordered_json{{"path", p}, {"sha256", file_sha256_hex(p)}});
    }
    j["inputs"] = std::move(in);
    j["scorer_digest"] = scorer.empty() ? ordered_json(nullptr) : ordered_json(scorer);
    j["output"] = ordered_json{{"path", out}, {"sha256", file_sha256_hex(out)}};
    for (const auto& [k, v] : extra.items()) j[k] = v;
    write_file_atomic(out + ".manifest.json", j.dump(2) + "\n");
  }
};

// --- scorer selection -------------------------------------------------

struct BaselineOptions {
  std::string vocab = kDataDir + "/vocab.txt";
  std::string corpus;
  CorpusFormat format = CorpusFormat::kPretagged;
  double smoothing = 1.0;
};

struct ScorerOptions {
  BaselineOptions baseline;
  std::string endpoint = "baseline";
  std::string replay_cache;
  int timeout_ms = 30000;
  std::size_t max_in_flight = 16;
};

const std::map<std::string, CorpusFormat> kFormats = {{"plain", CorpusFormat::kPlain},
                                                      {"pretagged", CorpusFormat::kPretagged}};

void add_baseline_options(CLI::App* sub, BaselineOptions& o) {
  sub->add_option("--vocab", o.vocab, "WordPiece vocabulary, one piece per line")
      ->check(CLI::ExistingFile)
      ->capture_default_str();
  sub->add_option("--baseline-corpus", o.corpus,
                  "corpus for the unigram baseline counts; uniform when absent")
      ->check(CLI::ExistingFile);
  sub->add_option("--baseline-format", o.format, "plain or pretagged")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case))
      ->default_str("pretagged");
  sub->add_option("--smoothing", o.smoothing, "additive smoothing of unigram counts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void add_scorer_options(CLI::App* sub, ScorerOptions& o) {
  add_baseline_options(sub, o.baseline);
  sub->add_option("--scorer", o.endpoint, "baseline, exec:<command> or tcp:<host>:<port>")
      ->capture_default_str();
  sub->add_option("--replay-cache", o.replay_cache,
                  "record scorer responses here and replay them on later runs");
  sub->add_option("--timeout-ms", o.timeout_ms, "per-response timeout for remote scorers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--max-in-flight", o.max_in_flight, "pipelined requests for remote scorers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

AbbreviationSet default_abbreviations() {
  return load_abbreviations(kDataDir + "/abbreviations.txt");
}

std::unique_ptr<UnigramScorer> make_baseline(const Vocab& vocab, const BaselineOptions& o) {
  if (o.corpus.empty()) return std::make_unique<UnigramScorer>(UnigramScorer::uniform(vocab));
  const PosTagger tagger = PosTagger::load_default();
  const SentenceSegmenter segmenter(default_abbreviations());
  std::vector<CorpusIssue> issues;
  const auto records = load_corpus(o.corpus, o.format, &tagger, &segmenter, &issues);
  for (const CorpusIssue& i : issues) {
    std::cerr << o.corpus << ":" << i.line << ": " << i.message << "\n";
  }
  return std::make_unique<UnigramScorer>(UnigramScorer::fit(vocab, records, o.smoothing));
}

class ScorerHandle {
 public:
  explicit ScorerHandle(const ScorerOptions& o) : vocab_(Vocab::load(o.baseline.vocab)) {
    if (o.endpoint == "baseline") {
      inner_ = make_baseline(vocab_, o.baseline);
    } else {
      RemoteOptions ro;
      ro.timeout = std::chrono::milliseconds(o.timeout_ms);
      ro.max_in_flight = o.max_in_flight;
      inner_ = RemoteScorer::connect(o.endpoint, vocab_.digest(), ro);
    }
    if (!o.replay_cache.empty()) {
      cache_ = std::make_unique<ReplayCacheScorer>(*inner_, o.replay_cache);
    }
  }

  Scorer& scorer() { return cache_ ? static_cast<Scorer&>(*cache_) : *inner_; }
  const Vocab& vocab() const { return vocab_; }
  std::string digest() { return scorer().identity() + "/" + vocab_.digest(); }

 private:
  Vocab vocab_;
  std::unique_ptr<Scorer> inner_;
  std::unique_ptr<ReplayCacheScorer> cache_;
};

std::string outcome_name(FilterOutcome o) {
  switch (o) {
    case FilterOutcome::kKept:
      return "kept";
    case FilterOutcome::kRejected:
      return "rejected";
    case FilterOutcome::kErrored:
      return "errored";
  }
  return "rejected";
}

// --- subcommands ------------------------------------------------------

struct Args {
  std::string in, out, corpus, train, eval, annotations, labels, removed_out, stats_out,
      decisions_out, table_out, wnli, label = "model", listen, abbreviations;
  CorpusFormat format = CorpusFormat::kPretagged;
  double rate = 0;
  std::uint64_t seed = 0;
  std::uint64_t shuffle_seed = 0;
  bool no_shuffle = false;
  std::size_t n = 0;
  std::size_t batch_size = 1024;
  std::size_t max_connections = 0;
  PairSplitMode pair_mode = PairSplitMode::kNoPairs;
  FilterConfig filter;
  LossParams loss;
  MaskFilling filling = MaskFilling::kJoint;
  ConsistencyRule consistency = ConsistencyRule::kFlip;
  bool unalignable_incorrect = true;
  ScorerOptions scorer;
};

std::optional<std::uint64_t> shuffle(const Args& a) {
  if (a.no_shuffle) return std::nullopt;
  return a.shuffle_seed;
}

int cmd_generate(const CLI::App& sub, const Args& a) {
  const PosTagger tagger = PosTagger::load_default();
  const SentenceSegmenter segmenter(a.abbreviations.empty() ? default_abbreviations()
                                                            : load_abbreviations(a.abbreviations));
  std::vector<CorpusIssue> issues;
  const auto records = load_corpus(a.corpus, a.format, &tagger, &segmenter, &issues);
  for (const CorpusIssue& i : issues) {
    std::cerr << a.corpus << ":" << i.line << ": " << i.message << "\n";
  }
  const auto examples = generate_all(records);
  write_dataset(a.out, examples);
  Manifest m(sub, {a.corpus});
  m.extra["sentences"] = records.size();
  m.extra["corpus_issues"] = issues.size();
  m.extra["examples"] = examples.size();
  m.write(a.out);
  std::cerr << "generate: " << records.size() << " sentences, " << examples.size()
            << " examples\n";
  return kExitOk;
}

int cmd_downsample(const CLI::App& sub, const Args& a) {
  const auto data = read_dataset(a.in);
  const auto kept = downsample(data, a.rate, a.seed);
  write_dataset(a.out, kept);
  Manifest m(sub, {a.in}, a.seed);
  m.extra["kept"] = kept.size();
  m.extra["total"] = data.size();
  m.write(a.out);
  return kExitOk;
}

int cmd_split_pairs(const CLI::App& sub, const Args& a) {
  const auto data = read_dataset(a.in);
  const auto kept = split_pairs(data, a.pair_mode, a.seed);
  write_dataset(a.out, kept);
  Manifest m(sub, {a.in}, a.seed);
  m.extra["kept"] = kept.size();
  m.write(a.out);
  return kExitOk;
}

int cmd_dedup(const CLI::App& sub, const Args& a) {
  const auto train = read_dataset(a.train);
  const auto eval = read_dataset(a.eval);
  const OverlapResult r = remove_overlap(train, eval);
  write_dataset(a.out, r.kept);
  if (!a.removed_out.empty()) {
    std::string ids;
    for (const std::string& id : r.removed_ids) ids += id + "\n";
    write_file_atomic(a.removed_out, ids);
  }
  Manifest m(sub, {a.train, a.eval});
  m.extra["removed"] = r.removed_ids.size();
  m.write(a.out);
  return kExitOk;
}

int cmd_filter(const CLI::App& sub, const Args& a) {
  a.filter.validate();
  const auto data = read_dataset(a.in);
  ScorerHandle h(a.scorer);
  FilterResult r = filter_dataset(h.scorer(), h.vocab(), data, a.filter, a.batch_size);
  write_dataset(a.out, r.kept);
  const std::string stats_path = a.stats_out.empty() ? a.out + ".stats.json" : a.stats_out;
  write_file_atomic(stats_path, r.stats.to_json().dump(2) + "\n");
  if (!a.decisions_out.empty()) {
    AtomicFile f(a.decisions_out);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const FilterDecision& d = r.decisions[i];
      ordered_json j;
      j["id"] = data[i].id;
      j["outcome"] = outcome_name(d.outcome);
      ordered_json v = ordered_json::array();
      for (double x : d.v) v.push_back(finite_or_null(x));
      j["v"] = std::move(v);
      j["whole_word_frac"] = d.whole_word_frac;
      if (!d.error.empty()) j["error"] = d.error;
      f.stream() << j.dump() << "\n";
    }
    f.commit();
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (r.decisions[i].outcome == FilterOutcome::kErrored) {
      std::cerr << "filter: " << data[i].id << ": " << r.decisions[i].error << "\n";
    }
  }
  Manifest m(sub, {a.in, a.scorer.baseline.vocab});
  m.scorer = h.digest();
  m.extra["stats"] = r.stats.to_json();
  m.write(a.out);
  return kExitOk;
}

int cmd_score(const CLI::App& sub, const Args& a) {
  const auto data = read_dataset(a.in);
  ScorerHandle h(a.scorer);
  const auto scores = score_examples(h.scorer(), h.vocab(), data, a.filling);
  AtomicFile f(a.out);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const MaskedExample& ex = data[i];
    std::vector<double> values;
    ordered_json vals = ordered_json::array();
    ordered_json counts = ordered_json::array();
    for (const CandidateScore& s : scores[i]) {
      values.push_back(s.avg_log_prob);
      vals.push_back(finite_or_null(s.avg_log_prob));
      counts.push_back(s.piece_count);
    }
    const auto order = candidate_order(ex, shuffle(a));
    const std::size_t predicted = predict_from_scores(values, order);
    const double loss = example_loss(values, ex.answer_idx, a.loss);
    if (predicted == ex.answer_idx) ++correct;
    ordered_json j;
    j["id"] = ex.id;
    j["avg_log_probs"] = std::move(vals);
    j["piece_counts"] = std::move(counts);
    j["predicted"] = predicted;
    j["correct"] = predicted == ex.answer_idx;
    j["loss"] = finite_or_null(loss);
    f.stream() << j.dump() << "\n";
  }
  f.commit();
  Manifest m(sub, {a.in, a.scorer.baseline.vocab});
  m.scorer = h.digest();
  m.extra["accuracy"] = data.empty() ? 0.0 : static_cast<double>(correct) / data.size();
  m.write(a.out);
  return kExitOk;
}

WnliResult run_wnli(ScorerHandle& h, const Args& a, const std::string& path) {
  const auto rows = read_wnli_tsv(path);
  const PosTagger tagger = PosTagger::load_default();
  const WnliTransformer transformer(tagger, default_abbreviations());
  WnliOptions opts;
  opts.unalignable_counts_incorrect = a.unalignable_incorrect;
  opts.shuffle_seed = shuffle(a);
  WnliResult r = evaluate_wnli(h.scorer(), h.vocab(), transformer, rows, opts);
  for (const WnliSkip& s : r.skipped) {
    std::cerr << path << ": row " << s.index << ": " << s.reason << "\n";
  }
  return r;
}

int cmd_eval_wsc(const CLI::App& sub, const Args& a) {
  const auto data = read_dataset(a.in);
  const auto annotations = read_annotations(a.annotations);
  ScorerHandle h(a.scorer);
  EvalOptions opts;
  opts.shuffle_seed = shuffle(a);
  opts.consistency_rule = a.consistency;
  MetricsReport report = evaluate_wsc(h.scorer(), h.vocab(), data, annotations, opts);
  ordered_json j = report.to_json();
  Manifest m(sub, {a.in, a.annotations, a.scorer.baseline.vocab});
  if (!a.wnli.empty()) {
    const WnliResult w = run_wnli(h, a, a.wnli);
    report.wnli_accuracy = w.accuracy;
    j["wnli"] = w.accuracy;
    j["wnli_detail"] = w.to_json();
    m.inputs.push_back(a.wnli);
  }
  const std::string table = render_report(report, a.label);
  write_file_atomic(a.out, j.dump(2) + "\n");
  if (!a.table_out.empty()) write_file_atomic(a.table_out, table);
  std::cout << table;
  m.scorer = h.digest();
  m.write(a.out);
  return kExitOk;
}

int cmd_eval_wnli(const CLI::App& sub, const Args& a) {
  ScorerHandle h(a.scorer);
  const WnliResult r = run_wnli(h, a, a.in);
  write_file_atomic(a.out, r.to_json().dump(2) + "\n");
  std::cout << "WNLI accuracy " << r.correct << "/" << r.total << "\n";
  Manifest m(sub, {a.in, a.scorer.baseline.vocab});
  m.scorer = h.digest();
  m.write(a.out);
  return kExitOk;
}

int cmd_audit_sample(const CLI::App& sub, const Args& a) {
  const auto data = read_dataset(a.in);
  const auto sample = audit_sample(data, a.n, a.seed);
  write_dataset(a.out, sample);
  Manifest m(sub, {a.in}, a.seed);
  m.write(a.out);
  return kExitOk;
}

int cmd_audit_tally(const CLI::App& sub, const Args& a) {
  const QualityTally t = tally_audit(a.labels);
  write_file_atomic(a.out, t.to_json().dump(2) + "\n");
  for (QualityCategory c : {QualityCategory::kUnsolvable, QualityCategory::kHard,
                            QualityCategory::kEasy, QualityCategory::kNoise}) {
    std::cout << category_name(c) << "\t" << t.count(c) << "\t" << t.percent(c) << "%\n";
  }
  Manifest m(sub, {a.labels});
  m.write(a.out);
  return kExitOk;
}

int cmd_serve_baseline(const Args& a) {
  const Vocab vocab = Vocab::load(a.scorer.baseline.vocab);
  auto scorer = make_baseline(vocab, a.scorer.baseline);
  if (a.listen.empty()) {
    FdChannel stdio(0, 1, false);
    serve(*scorer, stdio);
    return kExitOk;
  }
  const std::size_t colon = a.listen.rfind(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--listen", "expected host:port");
  const std::string host = a.listen.substr(0, colon);
  const unsigned long port = std::stoul(a.listen.substr(colon + 1));
  if (port > 65535) throw CLI::ValidationError("--listen", "port out of range");
  TcpServer server(host, static_cast<std::uint16_t>(port));
  std::cerr << "serve-baseline: listening on " << host << ":" << server.port() << std::endl;
  server.run(*scorer, a.max_connections);
  return kExitOk;
}

CLI::Option* add_in(CLI::App* sub, std::string& target, const std::string& help) {
  return sub->add_option("--in", target, help)->required()->check(CLI::ExistingFile);
}

CLI::Option* add_out(CLI::App* sub, std::string& target, const std::string& help) {
  return sub->add_option("--out", target, help)->required()->check(kWritablePath);
}

void add_shuffle_options(CLI::App* sub, Args& a) {
  sub->add_option("--shuffle-seed", a.shuffle_seed,
                  "seed of the candidate shuffle that breaks score ties")
      ->capture_default_str();
  sub->add_flag("--no-shuffle", a.no_shuffle, "keep candidates in file order");
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Masked-candidate dataset, scoring and evaluation toolkit", "wsckit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with the same fields; flags win");
  int workers = 0;
  app.add_option("--workers", workers, "worker threads; 0 uses all available")
      ->check(CLI::NonNegativeNumber);

  Args a;
  const std::map<std::string, PairSplitMode> pair_modes = {
      {"no-pairs", PairSplitMode::kNoPairs}, {"half-pairs", PairSplitMode::kHalfPairs}};
  const std::map<std::string, PairRule> pair_rules = {{"all", PairRule::kAllPairs},
                                                      {"any", PairRule::kAnyPair}};
  const std::map<std::string, WholeWordScope> scopes = {
      {"sentence", WholeWordScope::kSentence}, {"candidates", WholeWordScope::kCandidates}};
  const std::map<std::string, WholeWordDenominator> denominators = {
      {"pieces", WholeWordDenominator::kPieces}, {"words", WholeWordDenominator::kWords}};
  const std::map<std::string, MaskFilling> fillings = {{"joint", MaskFilling::kJoint},
                                                       {"incremental", MaskFilling::kIncremental}};
  const std::map<std::string, ConsistencyRule> rules = {
      {"flip", ConsistencyRule::kFlip}, {"flip-and-correct", ConsistencyRule::kFlipAndCorrect}};
  const std::map<std::string, bool> unalignable = {{"incorrect", true}, {"exclude", false}};

  auto* gen = app.add_subcommand("generate", "mine masked examples from a corpus");
  gen->add_option("--corpus", a.corpus, "input corpus")->required()->check(CLI::ExistingFile);
  gen->add_option("--format", a.format, "plain or pretagged")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case))
      ->default_str("pretagged");
  gen->add_option("--abbreviations", a.abbreviations, "abbreviation list for segmentation")
      ->check(CLI::ExistingFile);
  add_out(gen, a.out, "dataset output");

  auto* down = app.add_subcommand("downsample", "keep a seeded fraction of a dataset");
  add_in(down, a.in, "dataset input");
  add_out(down, a.out, "dataset output");
  down->add_option("--rate", a.rate, "kept fraction in (0, 1]")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  down->add_option("--seed", a.seed, "sampling seed")->required();

  auto* split = app.add_subcommand("split-pairs", "derive the no-pairs or half-pairs variant");
  add_in(split, a.in, "dataset input");
  add_out(split, a.out, "dataset output");
  split->add_option("--mode", a.pair_mode, "no-pairs or half-pairs")
      ->transform(CLI::CheckedTransformer(pair_modes, CLI::ignore_case))
      ->default_str("no-pairs");
  split->add_option("--seed", a.seed, "sampling seed")->required();

  auto* dedup = app.add_subcommand("dedup", "drop training examples that match eval items");
  dedup->add_option("--train", a.train, "training dataset")
      ->required()
      ->check(CLI::ExistingFile);
  dedup->add_option("--eval", a.eval, "evaluation dataset")->required()->check(CLI::ExistingFile);
  add_out(dedup, a.out, "deduplicated training dataset");
  dedup->add_option("--removed-out", a.removed_out, "ids of removed examples")
      ->check(kWritablePath);

  auto* filt = app.add_subcommand("filter", "keep examples inside the score band");
  add_in(filt, a.in, "dataset input");
  add_out(filt, a.out, "kept examples");
  filt->add_option("--v-min", a.filter.v_min, "lower band edge, inclusive")
      ->capture_default_str();
  filt->add_option("--v-max", a.filter.v_max, "upper band edge, inclusive")
      ->capture_default_str();
  filt->add_option("--min-whole-word-frac", a.filter.min_whole_word_frac,
                   "minimum whole-word fraction")
      ->capture_default_str();
  filt->add_option("--pair-rule", a.filter.pair_rule, "all or any distractor must pass")
      ->transform(CLI::CheckedTransformer(pair_rules, CLI::ignore_case))
      ->default_str("all");
  filt->add_option("--whole-word-scope", a.filter.whole_word_scope, "sentence or candidates")
      ->transform(CLI::CheckedTransformer(scopes, CLI::ignore_case))
      ->default_str("sentence");
  filt->add_option("--whole-word-denominator", a.filter.denominator, "pieces or words")
      ->transform(CLI::CheckedTransformer(denominators, CLI::ignore_case))
      ->default_str("pieces");
  filt->add_option("--batch-size", a.batch_size, "examples per scorer call")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  filt->add_option("--stats-out", a.stats_out, "stats record, default <out>.stats.json")
      ->check(kWritablePath);
  filt->add_option("--decisions-out", a.decisions_out, "per-example decisions")
      ->check(kWritablePath);
  add_scorer_options(filt, a.scorer);

  auto* score = app.add_subcommand("score", "score candidates and report predictions and loss");
  add_in(score, a.in, "dataset input");
  add_out(score, a.out, "per-example scores");
  score->add_option("--alpha", a.loss.alpha, "margin weight of the pair loss")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  score->add_option("--beta", a.loss.beta, "margin of the pair loss")->capture_default_str();
  score->add_option("--mask-filling", a.filling, "joint or incremental")
      ->transform(CLI::CheckedTransformer(fillings, CLI::ignore_case))
      ->default_str("joint");
  add_shuffle_options(score, a);
  add_scorer_options(score, a.scorer);

  auto* wsc = app.add_subcommand("eval-wsc", "subset metrics on an annotated WSC set");
  add_in(wsc, a.in, "WSC dataset");
  wsc->add_option("--annotations", a.annotations, "per-example annotations")
      ->required()
      ->check(CLI::ExistingFile);
  add_out(wsc, a.out, "metrics record");
  wsc->add_option("--table-out", a.table_out, "text table")->check(kWritablePath);
  wsc->add_option("--wnli", a.wnli, "WNLI rows to fill the last column")
      ->check(CLI::ExistingFile);
  wsc->add_option("--label", a.label, "row label of the table")->capture_default_str();
  wsc->add_option("--consistency", a.consistency, "flip or flip-and-correct")
      ->transform(CLI::CheckedTransformer(rules, CLI::ignore_case))
      ->default_str("flip");
  wsc->add_option("--unalignable", a.unalignable_incorrect, "incorrect or exclude")
      ->transform(CLI::CheckedTransformer(unalignable, CLI::ignore_case))
      ->default_str("incorrect");
  add_shuffle_options(wsc, a);
  add_scorer_options(wsc, a.scorer);

  auto* wnli = app.add_subcommand("eval-wnli", "WNLI accuracy through the masked transform");
  add_in(wnli, a.in, "WNLI rows, tab-separated with a header");
  add_out(wnli, a.out, "result record");
  wnli->add_option("--unalignable", a.unalignable_incorrect, "incorrect or exclude")
      ->transform(CLI::CheckedTransformer(unalignable, CLI::ignore_case))
      ->default_str("incorrect");
  add_shuffle_options(wnli, a);
  add_scorer_options(wnli, a.scorer);

  auto* sample = app.add_subcommand("audit-sample", "draw a seeded sample for manual review");
  add_in(sample, a.in, "dataset input");
  add_out(sample, a.out, "sampled examples");
  sample->add_option("--n", a.n, "sample size")->required()->check(CLI::PositiveNumber);
  sample->add_option("--seed", a.seed, "sampling seed")->required();

  auto* tally = app.add_subcommand("audit-tally", "tally reviewer labels");
  tally->add_option("--labels", a.labels, "lines of id<TAB>category")
      ->required()
      ->check(CLI::ExistingFile);
  add_out(tally, a.out, "tally record");

  auto* serve_cmd = app.add_subcommand("serve-baseline", "serve the unigram scorer");
  add_baseline_options(serve_cmd, a.scorer.baseline);
  serve_cmd->add_option("--listen", a.listen, "host:port; stdio when absent");
  serve_cmd->add_option("--max-connections", a.max_connections,
                        "stop after this many connections; 0 serves forever")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  if (workers > 0) omp_set_num_threads(workers);

  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (name == "generate") return cmd_generate(*sub, a);
    if (name == "downsample") return cmd_downsample(*sub, a);
    if (name == "split-pairs") return cmd_split_pairs(*sub, a);
    if (name == "dedup") return cmd_dedup(*sub, a);
    if (name == "filter") return cmd_filter(*sub, a);
    if (name == "score") return cmd_score(*sub, a);
    if (name == "eval-wsc") return cmd_eval_wsc(*sub, a);
    if (name == "eval-wnli") return cmd_eval_wnli(*sub, a);
    if (name == "audit-sample") return cmd_audit_sample(*sub, a);
    if (name == "audit-tally") return cmd_audit_tally(*sub, a);
    if (name == "serve-baseline") return cmd_serve_baseline(a);
  } catch (const ScorerError& e) {
    std::cerr << "scorer error: " << e.what() << "\n";
    return kExitScorer;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what();
    if (!e.record_id().empty()) std::cerr << " [record " << e.record_id() << "]";
    std::cerr << "\n";
    return kExitData;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace wsckit
