#include "limra/cli.hpp"

#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "limra/bench.hpp"
#include "limra/config.hpp"
#include "limra/engine.hpp"
#include "limra/pipeline.hpp"
#include "limra/synth.hpp"

namespace limra::cli {

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

int exit_code_for(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kConfig:
      return kConfig;
    case ErrorCategory::kBackend:
      return kBackend;
    case ErrorCategory::kData:
    case ErrorCategory::kDegenerate:
      return kData;
  }
  return kInternal;
}

/// Scorer options shared by score, bench and selfcheck.
struct ScorerFlags {
  std::string backend = "lexical";
  std::string endpoint;
  std::string fixture;
  int timeout_ms = 30000;
  int retries = 3;
  std::size_t chunk_budget = kDefaultChunkBudget;
  std::string abbreviations;

  void attach(CLI::App* cmd) {
    cmd->add_option("--backend", backend, "lexical | fixture | remote")
        ->check(CLI::IsMember({"lexical", "fixture", "remote"}));
    cmd->add_option("--endpoint", endpoint, "sidecar base URL for --backend remote")->envname("LIMRA_ENDPOINT");
    cmd->add_option("--fixture", fixture, "recorded alignments JSON for --backend fixture");
    cmd->add_option("--timeout-ms", timeout_ms, "per-request timeout")->check(CLI::PositiveNumber);
    cmd->add_option("--retries", retries, "retries on transport errors and 5xx")->check(CLI::NonNegativeNumber);
    cmd->add_option("--chunk-budget", chunk_budget, "context chunk budget in tokens")->check(CLI::PositiveNumber);
    cmd->add_option("--abbreviations", abbreviations, "abbreviation guard list, one per line");
  }

  BackendConfig backend_config() const {
    BackendConfig c;
    c.kind = parse_backend_kind(backend);
    c.fixture_path = fixture;
    c.remote.endpoint = endpoint;
    c.remote.timeout = std::chrono::milliseconds(timeout_ms);
    c.remote.retries = retries;
    return c;
  }
};

struct Common {
  std::size_t parallelism = 1;
  std::uint64_t seed = kDefaultSeed;
  std::string data_dir;
};

GlobalConfig resolve(const Common& common, const ScorerFlags* scorer) {
  GlobalConfig g;
  g.parallelism = common.parallelism;
  g.seed = common.seed;
  g.data_dir = common.data_dir;
  if (scorer) {
    g.chunk_budget = scorer->chunk_budget;
    g.abbreviations_path = scorer->abbreviations;
    g.backend = parse_backend_kind(scorer->backend);
    g.endpoint = scorer->endpoint;
    g.fixture_path = scorer->fixture;
  }
  spdlog::info("config {} hash {}", g.to_json().dump(), g.hash());
  return g;
}

// ---------------------------------------------------------------------------

struct ScoreArgs {
  std::vector<std::string> pair;
  std::string in;
  std::string out;
};

ordered_json breakdown_json(const ScoreResult& r, const std::string& hash) {
  ordered_json j;
  j["id"] = r.id;
  if (r.ok()) {
    j["score"] = r.score->overall.value();
    j["per_sentence"] = r.score->per_sentence_max;
    j["best_chunk"] = r.score->best_chunk_index;
  } else {
    j["error"] = r.error;
    j["category"] = r.error_category ? to_string(*r.error_category) : "unknown";
  }
  j["config_hash"] = hash;
  return j;
}

int cmd_score(const ScoreArgs& args, const ScorerFlags& flags, const Common& common, std::ostream& out) {
  if (args.pair.empty() == args.in.empty()) throw ConfigError("score needs exactly one of --pair or --in");
  const GlobalConfig g = resolve(common, &flags);
  std::optional<AbbreviationList> abbrev;
  if (!flags.abbreviations.empty()) abbrev = AbbreviationList::from_file(flags.abbreviations);
  ScoringOptions opts;
  opts.tokenizer.chunk_budget = flags.chunk_budget;
  opts.tokenizer.validate();
  if (abbrev) opts.abbreviations = &*abbrev;
  opts.parallelism = common.parallelism;
  auto backend = make_backend(flags.backend_config());

  if (!args.pair.empty()) {
    const std::string context = slurp(args.pair[0]);
    const std::string claim = slurp(args.pair[1]);
    const ScoreBreakdown b = score_pair(context, claim, *backend, opts.tokenizer, "pair", *opts.abbreviations);
    std::ostringstream o;
    o << "score " << fixed4(b.overall.value()) << "\n";
    for (std::size_t i = 0; i < b.per_sentence_max.size(); ++i)
      o << "sentence " << i << " " << fixed4(b.per_sentence_max[i]) << " chunk " << b.best_chunk_index[i] << "\n";
    o << "backend " << backend->identity().kind << " config " << g.hash() << "\n";
    if (args.out.empty())
      out << o.str();
    else
      spit(args.out, o.str());
    return kOk;
  }

  // JSONL: bad lines become error objects in place.
  const std::string text = slurp(args.in);
  std::vector<PairInput> records;
  std::vector<std::optional<std::string>> parse_errors;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    PairInput p;
    p.id = "line" + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      if (j.contains("id") && j["id"].is_string()) p.id = j["id"].get<std::string>();
      p.context = j.at("context").get<std::string>();
      p.claim = j.at("claim").get<std::string>();
      parse_errors.emplace_back();
    } catch (const json::exception& e) {
      parse_errors.emplace_back(std::string("line ") + std::to_string(line_no) + ": " + e.what());
    }
    records.push_back(std::move(p));
  }

  // Only well-formed records go to the backend.
  std::vector<PairInput> good;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (!parse_errors[i]) good.push_back(records[i]);
  const BatchResult batch = score_batch(good, *backend, opts);

  std::string body;
  std::size_t k = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    ScoreResult r;
    if (parse_errors[i]) {
      r.id = records[i].id;
      r.error = *parse_errors[i];
      r.error_category = ErrorCategory::kData;
    } else {
      r = batch.results[k++];
    }
    body += breakdown_json(r, g.hash()).dump();
    body += '\n';
  }
  if (args.out.empty())
    out << body;
  else
    spit(args.out, body);
  return kOk;
}

// ---------------------------------------------------------------------------

struct CleanArgs {
  std::string registry;
  std::string out;
  std::optional<std::size_t> cap;
  std::size_t max_context_tokens = kMaxContextTokens;
  double sim_threshold = kFakeSimilarityThreshold;
  std::vector<std::string> sources;
};

int cmd_clean(const CleanArgs& args, const Common& common, std::ostream& out) {
  GlobalConfig g = resolve(common, nullptr);
  const auto registry = load_registry(args.registry);
  std::map<std::string, std::string> sources;
  for (const auto& s : args.sources) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--source expects id=path, got '" + s + "'");
    sources[s.substr(0, eq)] = s.substr(eq + 1);
  }
  PipelineConfig pc;
  pc.out_dir = args.out;
  pc.cap = args.cap;
  pc.max_context_tokens = args.max_context_tokens;
  pc.sim_threshold = args.sim_threshold;
  pc.parallelism = common.parallelism;
  pc.seed = common.seed;
  pc.config_hash = g.hash();
  const PipelineResult r = run_pipeline(registry, sources, pc);
  ordered_json j;
  j["config_hash"] = g.hash();
  j["total"] = r.total.to_json();
  j["files"] = r.written_files;
  out << j.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string source;
  std::string mode = "name";
  std::string backend = "stub";
  std::string llm_endpoint;
  std::string prompts;
  std::string out;
  std::size_t in_flight = 4;
};

int cmd_synth(const SynthArgs& args, const Common& common, std::ostream& out) {
  GlobalConfig g = resolve(common, nullptr);
  const auto source = read_unified_jsonl(args.source);
  SynthConfig sc;
  sc.kind = args.mode == "name" ? RobustKind::kName : RobustKind::kNum;
  sc.seed = common.seed;
  sc.in_flight = std::max<std::size_t>(1, args.in_flight);

  RuleEntityDetector detector;
  std::unique_ptr<LlmClient> llm;
  std::unique_ptr<Perturber> perturber;
  if (args.backend == "llm") {
    if (args.llm_endpoint.empty()) throw ConfigError("--backend llm needs --llm-endpoint");
    LlmConfig lc;
    lc.endpoint = args.llm_endpoint;
    llm = std::make_unique<HttpLlmClient>(lc);
    perturber = std::make_unique<LlmPerturber>(
        *llm, args.prompts.empty() ? PromptLibrary::builtin() : PromptLibrary::from_directory(args.prompts));
  } else {
    perturber = std::make_unique<StubPerturber>();
  }

  const SynthOutput r = generate_robustness(source, sc, detector, *perturber);
  const fs::path dir(args.out);
  const std::string id(dataset_id_for(sc.kind));
  auto jsonl = [](const std::vector<UnifiedSample>& v) {
    std::string s;
    for (const auto& x : v) s += to_jsonl(x) + "\n";
    return s;
  };
  spit(dir / (id + ".jsonl"), jsonl(r.samples));
  spit(dir / (id + "_train.jsonl"), jsonl(r.train));
  spit(dir / (id + "_test.jsonl"), jsonl(r.test));
  std::string recs, audit;
  for (const auto& x : r.records) recs += x.to_json().dump() + "\n";
  for (const auto& x : r.audit) audit += x.to_json().dump() + "\n";
  spit(dir / (id + "_perturbations.jsonl"), recs);
  spit(dir / (id + "_audit.jsonl"), audit);
  ordered_json stats;
  stats["config_hash"] = g.hash();
  stats["dataset"] = id;
  stats["backend"] = args.backend;
  stats["stats"] = r.stats.to_json();
  stats["train"] = r.train.size();
  stats["test"] = r.test.size();
  spit(dir / (id + "_stats.json"), stats.dump(2) + "\n");
  out << stats.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::vector<std::string> benchmarks;
  bool avg_star = false;
  bool balanced = false;
  bool strict = false;
  bool json_stdout = false;
  double scale = 1.0;
  std::string out;
};

int cmd_bench(const BenchArgs& args, ScorerFlags flags, const Common& common, std::ostream& out) {
  if (common.data_dir.empty()) throw ConfigError("bench needs --data (or LIMRA_DATA_DIR)");
  const GlobalConfig g = resolve(common, &flags);
  std::optional<AbbreviationList> abbrev;
  if (!flags.abbreviations.empty()) abbrev = AbbreviationList::from_file(flags.abbreviations);

  BenchOptions opts;
  opts.avg_star = args.avg_star;
  opts.balanced_accuracy = args.balanced;
  opts.count_check = args.strict ? CountCheck::kError : CountCheck::kWarn;
  opts.split_seed = common.seed;
  opts.scoring.tokenizer.chunk_budget = flags.chunk_budget;
  opts.scoring.tokenizer.validate();
  if (abbrev) opts.scoring.abbreviations = &*abbrev;
  opts.scoring.parallelism = common.parallelism;

  std::vector<BenchmarkReport> reports;
  BackendIdentity identity;
  for (const auto& id : args.benchmarks) {
    BenchmarkManifest m = load_manifest(id);
    if (args.scale != 1.0) m = scale_manifest(m, args.scale);
    const std::string dir = (fs::path(common.data_dir) / m.benchmark_id).string();
    ScorerFlags f = flags;
    if (f.backend == "fixture" && f.fixture.empty()) f.fixture = (fs::path(dir) / "alignments.json").string();
    auto backend = make_backend(f.backend_config());
    identity = backend->identity();
    reports.push_back(run_benchmark(m, dir, *backend, opts));
  }
  const EvalReport report = make_eval_report(std::move(reports), identity, g.hash(), g.to_json());
  const std::string js = report.to_json().dump(2) + "\n";
  if (!args.out.empty()) spit(args.out, js);
  out << (args.json_stdout ? js : report.render_table());
  return kOk;
}

struct GenArgs {
  std::vector<std::string> benchmarks;
  std::string out;
  double scale = 1.0;
};

int cmd_gen_fixture(const GenArgs& args, const Common& common, std::ostream& out) {
  for (const auto& id : args.benchmarks) {
    BenchmarkManifest m = load_manifest(id);
    if (args.scale != 1.0) m = scale_manifest(m, args.scale);
    const auto corpus = write_fixture_corpus(m, (fs::path(args.out) / m.benchmark_id).string(), common.seed);
    out << m.benchmark_id << ": " << corpus.files.size() << " datasets, " << m.total() << " records ("
        << m.consistent() << " consistent)\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_selfcheck(const ScorerFlags& flags, const Common& common, std::ostream& out) {
  const GlobalConfig g = resolve(common, &flags);
  auto backend = make_backend(flags.backend_config());
  const std::string context = "The Blue Ridge Mountains span 2,000 square miles. They are old.";
  const std::string claim = "The Blue Ridge Mountains span 2,000 square miles.";
  const ScoreBreakdown b = score_pair(context, claim, *backend, {}, "selfcheck");
  const auto id = backend->identity();
  out << "protocol " << kProtocolVersion << " " << kAlignPath << "\n"
      << "backend " << id.kind << " model " << id.model << " version " << id.version << "\n"
      << "score " << fixed4(b.overall.value()) << "\n"
      << "config " << g.hash() << "\n"
      << "ok\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  // Logs go to stderr so stdout stays machine-readable.
  static const bool logger_ready = [] {
    spdlog::set_default_logger(
        std::make_shared<spdlog::logger>("limra", std::make_shared<spdlog::sinks::stderr_sink_mt>()));
    spdlog::cfg::load_env_levels();  // SPDLOG_LEVEL=warn etc.
    return true;
  }();
  (void)logger_ready;

  CLI::App app{"limra: factual consistency scoring, data cleaning and benchmarks", "limra"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "print toolkit and protocol versions");

  Common common;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--parallelism", common.parallelism, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", common.seed, "seed for every random choice");
  };

  ScorerFlags score_flags, bench_flags, check_flags;

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "score a context/claim pair or a JSONL stream");
  score->add_option("--pair", score_args.pair, "context file and claim file")->expected(2);
  score->add_option("--in", score_args.in, "JSONL with id, context, claim");
  score->add_option("--out", score_args.out, "output file (default stdout)");
  score_flags.attach(score);
  add_common(score);

  CleanArgs clean_args;
  auto* clean = app.add_subcommand("clean", "clean training data per a dataset registry");
  clean->add_option("--registry", clean_args.registry, "registry JSON")->required();
  clean->add_option("--out", clean_args.out, "output directory")->required();
  clean->add_option("--cap", clean_args.cap, "samples kept per dataset")->check(CLI::PositiveNumber);
  clean->add_option("--max-context-tokens", clean_args.max_context_tokens, "contexts must be shorter than this")
      ->check(CLI::PositiveNumber);
  clean->add_option("--sim-threshold", clean_args.sim_threshold, "fake-answer cosine threshold")
      ->check(CLI::Range(0.0, 1.0));
  clean->add_option("--source", clean_args.sources, "id=path, overrides the registry source");
  add_common(clean);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "build Robust-Name / Robust-Num data");
  synth->add_option("--source", synth_args.source, "unified JSONL of entailed samples")->required();
  synth->add_option("--mode", synth_args.mode, "name | num")->check(CLI::IsMember({"name", "num"}));
  synth->add_option("--backend", synth_args.backend, "llm | stub")->check(CLI::IsMember({"llm", "stub"}));
  synth->add_option("--llm-endpoint", synth_args.llm_endpoint, "completion URL")->envname("LIMRA_LLM_ENDPOINT");
  synth->add_option("--prompts", synth_args.prompts, "directory with prompt templates");
  synth->add_option("--in-flight", synth_args.in_flight, "concurrent LLM calls")->check(CLI::PositiveNumber);
  synth->add_option("--out", synth_args.out, "output directory")->required();
  add_common(synth);

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "evaluate on SummaC / TRUE / SummEdits / LLMR");
  bench->add_option("--benchmark", bench_args.benchmarks, "benchmark id(s) or manifest path(s)")->required();
  bench->add_option("--data", common.data_dir, "directory holding <benchmark>/<dataset>.jsonl")
      ->envname("LIMRA_DATA_DIR");
  bench->add_flag("--avg-star", bench_args.avg_star, "also report AVG*");
  bench->add_flag("--balanced-accuracy", bench_args.balanced, "also report balanced accuracy");
  bench->add_flag("--strict", bench_args.strict, "count mismatches are errors");
  bench->add_option("--scale", bench_args.scale, "scale manifest counts")->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_args.out, "write the JSON report here");
  bench->add_flag("--json", bench_args.json_stdout, "print JSON instead of the table");
  bench_flags.attach(bench);
  add_common(bench);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen-fixture", "write stand-in benchmark corpora and alignments");
  gen->add_option("--benchmark", gen_args.benchmarks, "benchmark id(s)")->required();
  gen->add_option("--out", gen_args.out, "output directory")->required();
  gen->add_option("--scale", gen_args.scale, "scale manifest counts")->check(CLI::PositiveNumber);
  add_common(gen);

  auto* check = app.add_subcommand("selfcheck", "score a built-in pair through the configured backend");
  check_flags.attach(check);
  add_common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  if (show_version) {
    out << "limra " << kToolkitVersion << " (align protocol " << kProtocolVersion << ")\n";
    return kOk;
  }

  try {
    if (score->parsed()) return cmd_score(score_args, score_flags, common, out);
    if (clean->parsed()) return cmd_clean(clean_args, common, out);
    if (synth->parsed()) return cmd_synth(synth_args, common, out);
    if (bench->parsed()) return cmd_bench(bench_args, bench_flags, common, out);
    if (gen->parsed()) return cmd_gen_fixture(gen_args, common, out);
    if (check->parsed()) return cmd_selfcheck(check_flags, common, out);
    err << app.help();
    return kConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace limra::cli
