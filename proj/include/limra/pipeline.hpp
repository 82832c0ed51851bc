#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "limra/core.hpp"
#include "limra/segmentation.hpp"

namespace limra {

inline constexpr std::size_t kDefaultCap = 20000;
inline constexpr std::size_t kMaxContextTokens = 512;
inline constexpr double kFakeSimilarityThreshold = 0.85;

struct DatasetRegistryEntry {
  std::string dataset_id;
  LabelScheme label_scheme = LabelScheme::kThreeWay;
  bool enabled = true;
  bool is_qa = false;
  std::size_t cap = kDefaultCap;
  std::string source;  // optional; relative paths resolve against the registry file
  std::string note;
};

std::vector<DatasetRegistryEntry> parse_registry(const json& registry);
std::vector<DatasetRegistryEntry> load_registry(const std::string& path);
LabelRegistry to_label_registry(const std::vector<DatasetRegistryEntry>& entries);

/// keep iff the context is non-blank and has fewer than max_tokens tokens.
bool filter_by_length(const UnifiedSample& sample, std::size_t max_tokens = kMaxContextTokens,
                      const TokenizerSpec& spec = {});

struct QaSample {
  std::string passage;
  std::string question;
  std::string true_answer;
  std::vector<std::string> fake_answers;
};

/// question + " " + answer. Throws DataError when either side is blank.
std::string qa_to_claim(const QaSample& sample, std::string_view answer);

class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  /// Sparse vector as feature -> weight.
  virtual std::map<std::string, double> embed(std::string_view text) const = 0;
};

/// Term-frequency vector of lowercase character n-grams of the normalized answer.
class CharNgramEmbedder final : public TextEmbedder {
 public:
  explicit CharNgramEmbedder(std::size_t n = 3);
  std::map<std::string, double> embed(std::string_view text) const override;

 private:
  std::size_t n_;
};

double cosine(const std::map<std::string, double>& a, const std::map<std::string, double>& b);

/// Casefold, drop punctuation and the articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view text);

/// Drops fakes equal to the truth after normalization, fakes where one side
/// contains the other, and fakes with cosine >= threshold. Order is kept.
std::vector<std::string> filter_fake_answers(std::string_view true_answer, const std::vector<std::string>& fake_answers,
                                             const TextEmbedder& embedder,
                                             double threshold = kFakeSimilarityThreshold);

/// First `cap` samples in source order. cap == 0 is a ConfigError.
std::vector<UnifiedSample> cap_dataset(std::vector<UnifiedSample> samples, std::size_t cap);

struct FilterStats {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t dropped_by_length = 0;
  std::size_t dropped_by_similarity = 0;
  std::size_t dropped_by_cap = 0;
  std::size_t dropped_malformed = 0;

  void merge(const FilterStats& other);
  bool balanced() const noexcept;
  ordered_json to_json() const;
  bool operator==(const FilterStats&) const = default;
};

/// Training defaults; samples_per_dataset and max_context_length follow the run.
struct TrainingManifest {
  std::size_t samples_per_dataset = kDefaultCap;
  std::size_t max_context_length = kMaxContextTokens;
  std::string lr = "1e-5";
  std::uint64_t seed = 2027;
  int train_batch = 8;
  int accumulate_grad_batch = 1;
  int epoch = 3;
  std::string warmup_ratio = "0.06";
  std::string weight_decay = "0.01";
  std::string adam_epsilon = "1e-6";
};

/// Hand-rendered so float spellings stay exactly as written above.
std::string render_training_manifest(const TrainingManifest& manifest);

struct PipelineConfig {
  std::string out_dir;
  std::optional<std::size_t> cap;  // overrides per-entry caps
  std::size_t max_context_tokens = kMaxContextTokens;
  double sim_threshold = kFakeSimilarityThreshold;
  TokenizerSpec tokenizer;
  std::size_t parallelism = 1;
  std::uint64_t seed = 2027;
  std::string config_hash;
  const TextEmbedder* embedder = nullptr;  // null: CharNgramEmbedder(3)
};

struct PipelineResult {
  std::map<std::string, FilterStats> per_dataset;
  FilterStats total;
  std::vector<std::string> written_files;
};

/// Cleans one dataset from an in-memory JSONL stream. Malformed lines are
/// logged with their line number and counted, never thrown.
std::vector<UnifiedSample> clean_dataset(const DatasetRegistryEntry& entry, std::string_view jsonl,
                                         const PipelineConfig& config, FilterStats& stats);

/// `sources` maps dataset id -> JSONL path; entries with a `source` field are
/// used when the id is absent from the map. Disabled entries are skipped.
/// Writes <out>/<id>.jsonl, <out>/stats.json and <out>/train_manifest.json.
PipelineResult run_pipeline(const std::vector<DatasetRegistryEntry>& registry,
                            const std::map<std::string, std::string>& sources, const PipelineConfig& config);

}  // namespace limra
