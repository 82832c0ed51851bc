#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "limra/backends.hpp"
#include "limra/core.hpp"
#include "limra/engine.hpp"

namespace limra {

// ---------------------------------------------------------------------------
// metrics

/// Mann-Whitney U over P x N pairs, ties counted as half. Exact: the
/// concordant and tied counts are integers until the final division.
/// Throws SingleClassError unless both classes are present.
double auc_roc(const std::vector<double>& scores, const std::vector<bool>& labels);

/// (TPR + TNR) / 2 with prediction = score >= threshold.
double balanced_accuracy(const std::vector<double>& scores, const std::vector<bool>& labels, double threshold);

inline constexpr double kFallbackThreshold = 0.5;

struct ThresholdChoice {
  double threshold = kFallbackThreshold;
  std::optional<double> heldout_balanced_accuracy;
  bool fallback = true;
};

/// Grid search over midpoints of the distinct tuning-half scores. The split is
/// a seeded coin per index; ties go to the lowest midpoint. Falls back to 0.5
/// when splitting is off, when either half lacks a class, or when the tuning
/// half has a single distinct score.
ThresholdChoice select_threshold(const std::vector<double>& scores, const std::vector<bool>& labels,
                                 std::uint64_t split_seed, bool split = true);

// ---------------------------------------------------------------------------
// manifests

struct ManifestDataset {
  std::string dataset_id;
  std::size_t expected_total = 0;
  std::size_t expected_consistent = 0;
};

struct BenchmarkManifest {
  std::string benchmark_id;
  std::string name;
  std::vector<ManifestDataset> datasets;
  std::vector<std::string> avg_star_exclude;
  std::string note;

  static BenchmarkManifest from_json(const json& document);
  std::size_t total() const noexcept;
  std::size_t consistent() const noexcept;
};

inline constexpr std::string_view kBenchmarkIds[] = {"summac", "true", "summedits", "llmr"};

/// Built-in id (summac, true, summedits, llmr) or a path to a manifest file.
BenchmarkManifest load_manifest(std::string_view id_or_path);

/// total' = max(2, round(total * f)); consistent' = clamp(round(consistent * f), 1, total' - 1).
BenchmarkManifest scale_manifest(const BenchmarkManifest& manifest, double factor);

// ---------------------------------------------------------------------------
// reports

struct DatasetMetrics {
  std::string dataset_id;
  std::size_t n = 0;
  std::size_t n_consistent = 0;
  std::size_t failed_records = 0;
  std::optional<double> auc_roc;
  std::optional<double> balanced_accuracy;
  std::optional<double> threshold;
  std::string flag;  // why auc_roc is missing
};

struct BenchmarkReport {
  std::string benchmark_id;
  std::string name;
  std::vector<DatasetMetrics> datasets;
  std::optional<double> avg;
  std::optional<double> avg_star;
  std::vector<std::string> avg_star_excluded;
  std::vector<std::string> warnings;
};

struct EvalReport {
  std::vector<BenchmarkReport> benchmarks;
  std::optional<double> overall_average;  // mean of the benchmark AVGs
  BackendIdentity backend;
  std::string config_hash;
  ordered_json config;

  ordered_json to_json() const;
  /// One block per benchmark: datasets as columns, AVG (and AVG*) last.
  std::string render_table() const;
};

/// Plain mean in index order; nullopt for an empty input.
std::optional<double> unweighted_mean(const std::vector<double>& values);

enum class CountCheck { kWarn, kError };

struct BenchOptions {
  bool avg_star = false;
  bool balanced_accuracy = false;
  CountCheck count_check = CountCheck::kWarn;
  std::uint64_t split_seed = 2027;
  ScoringOptions scoring;
};

/// Reads <data_dir>/<dataset_id>.jsonl for every manifest dataset and scores
/// it. Fixture keys are "<dataset_id>/<sample_id>".
BenchmarkReport run_benchmark(const BenchmarkManifest& manifest, const std::string& data_dir, ScorerBackend& backend,
                              const BenchOptions& options);

/// Fills the AVG of each report and the overall average.
EvalReport make_eval_report(std::vector<BenchmarkReport> benchmarks, BackendIdentity backend,
                            std::string config_hash, ordered_json config = {});

// ---------------------------------------------------------------------------
// stand-in corpora

struct FixtureCorpus {
  std::vector<std::string> files;  // dataset JSONL files, manifest order
  std::string alignments_path;
};

/// Writes one JSONL per manifest dataset with exactly the expected counts plus
/// an alignments.json the fixture backend can replay. Same seed, same bytes.
FixtureCorpus write_fixture_corpus(const BenchmarkManifest& manifest, const std::string& out_dir,
                                   std::uint64_t seed);

}  // namespace limra
