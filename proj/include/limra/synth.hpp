#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "limra/core.hpp"

namespace limra {

enum class EntityKind { kPerson, kOrg, kTime, kQuantity, kDate, kNumberLike };

std::string_view to_string(EntityKind kind) noexcept;
bool is_name_kind(EntityKind kind) noexcept;

/// Byte range [start, end) of an entity inside a claim.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  EntityKind kind = EntityKind::kPerson;

  bool operator==(const EntitySpan&) const = default;
};

class EntityDetector {
 public:
  virtual ~EntityDetector() = default;
  virtual std::vector<EntitySpan> detect(std::string_view claim) const = 0;
};

/// Offline fallback tagger. Names: runs of two or more capitalized words, with
/// leading titles and function words dropped; ORG when the run ends in an
/// organisation suffix. Numbers: digits, number words and simple dates, plus
/// a following unit word (TIME for time units, QUANTITY otherwise).
class RuleEntityDetector final : public EntityDetector {
 public:
  std::vector<EntitySpan> detect(std::string_view claim) const override;
};

/// Runs the detector and returns non-overlapping spans sorted by start.
/// Overlaps resolve to the longer span, then the earlier one.
std::vector<EntitySpan> detect_entities(std::string_view claim, const EntityDetector& detector);

enum class PerturbMode { kNameChange, kNumChange, kNumRephrase };
enum class Polarity { kPositive, kNegative };

std::string_view to_string(PerturbMode mode) noexcept;
std::string_view to_string(Polarity polarity) noexcept;
/// Changes are negatives; rephrases are positives.
Polarity polarity_of(PerturbMode mode) noexcept;

/// Few-shot templates; "{original}" marks where the entity goes.
class PromptLibrary {
 public:
  static PromptLibrary builtin();
  /// Reads name_change.txt, num_change.txt and num_rephrase.txt from a directory.
  static PromptLibrary from_directory(const std::string& dir);

  const std::string& template_for(PerturbMode mode) const;
  std::string render(PerturbMode mode, std::string_view original) const;

 private:
  std::string name_change_;
  std::string num_change_;
  std::string num_rephrase_;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

struct LlmConfig {
  std::string endpoint;  // full URL, e.g. http://127.0.0.1:9000/v1/completions
  int max_tokens = 32;
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
  std::chrono::milliseconds backoff{200};
};

/// POSTs {"prompt", "max_tokens", "temperature": 0.0}; reads {"text"}.
class HttpLlmClient final : public LlmClient {
 public:
  explicit HttpLlmClient(LlmConfig config);
  std::string complete(const std::string& prompt) override;

 private:
  LlmConfig config_;
  std::string base_;
  std::string path_;
};

/// Prompt/completion trail for one perturbation.
struct AuditEntry {
  std::string audit_id;
  std::string source_sample_id;
  PerturbMode mode = PerturbMode::kNameChange;
  std::string surface;
  std::string backend;  // "llm" or "stub"
  std::string prompt;   // empty for the stub
  std::vector<std::string> completions;
  std::string outcome;  // "ok", "empty", "error: ..."

  json to_json() const;
};

/// Asks the LLM for a perturbed entity. Returns the first completion line,
/// trimmed; an empty answer is retried once, then nullopt.
std::optional<std::string> perturb_entity(std::string_view surface, PerturbMode mode, LlmClient& llm,
                                          const PromptLibrary& prompts, AuditEntry* audit = nullptr);

class Perturber {
 public:
  virtual ~Perturber() = default;
  virtual std::optional<std::string> perturb(std::string_view surface, PerturbMode mode, AuditEntry& audit) = 0;
  virtual bool concurrent() const noexcept = 0;
};

class LlmPerturber final : public Perturber {
 public:
  LlmPerturber(LlmClient& llm, PromptLibrary prompts) : llm_(llm), prompts_(std::move(prompts)) {}
  std::optional<std::string> perturb(std::string_view surface, PerturbMode mode, AuditEntry& audit) override;
  bool concurrent() const noexcept override { return true; }

 private:
  LlmClient& llm_;
  PromptLibrary prompts_;
};

/// Deterministic offline perturber: one-letter swap for names, +1 for number
/// changes, digits<->words for rephrases.
class StubPerturber final : public Perturber {
 public:
  std::optional<std::string> perturb(std::string_view surface, PerturbMode mode, AuditEntry& audit) override;
  bool concurrent() const noexcept override { return true; }
};

std::optional<std::string> stub_name_change(std::string_view surface);
std::optional<std::string> stub_num_change(std::string_view surface);
std::optional<std::string> stub_num_rephrase(std::string_view surface);

/// Rejects LLM no-ops; see the per-mode rules in the implementation.
bool verify_perturbation(std::string_view original, std::string_view replacement, PerturbMode mode);

struct PerturbationRecord {
  std::string source_sample_id;
  EntitySpan span;
  PerturbMode mode = PerturbMode::kNameChange;
  std::string replacement;
  Polarity polarity = Polarity::kNegative;
  bool verified = false;
  std::string audit_id;

  json to_json() const;
};

enum class RobustKind { kName, kNum };
std::string_view dataset_id_for(RobustKind kind) noexcept;

struct AssemblyStats {
  std::size_t emitted = 0;
  std::size_t originals = 0;
  std::size_t skipped_unverified = 0;
  std::size_t dropped_drift = 0;
  std::size_t skipped_source_label = 0;
};

/// Replaces each verified record's span in its source claim. Negatives become
/// CONTRADICTION, rephrases ALIGNED, and each source with at least one
/// emitted perturbation is also emitted unchanged as ALIGNED.
std::vector<UnifiedSample> assemble_dataset(std::span<const UnifiedSample> source,
                                            std::span<const PerturbationRecord> records, RobustKind kind,
                                            AssemblyStats* stats = nullptr);

/// Claim with [span.start, span.end) replaced.
std::string splice(std::string_view claim, const EntitySpan& span, std::string_view replacement);

struct SynthConfig {
  RobustKind kind = RobustKind::kName;
  std::uint64_t seed = 2027;
  std::size_t in_flight = 4;
  double train_fraction = 0.85;
};

struct SynthStats {
  std::size_t sources = 0;
  std::size_t skipped_source_label = 0;
  std::size_t detector_failures = 0;
  std::size_t spans = 0;
  std::size_t perturb_failures = 0;
  std::size_t unverified = 0;
  AssemblyStats assembly;

  json to_json() const;
};

struct SynthOutput {
  std::vector<PerturbationRecord> records;
  std::vector<UnifiedSample> samples;
  std::vector<UnifiedSample> train;
  std::vector<UnifiedSample> test;
  std::vector<AuditEntry> audit;
  SynthStats stats;
};

/// Detect, perturb (up to `in_flight` at once), verify, assemble, split.
/// The train/test split is seeded per source sample, so a source and all of
/// its perturbations land on the same side.
SynthOutput generate_robustness(std::span<const UnifiedSample> source, const SynthConfig& config,
                                const EntityDetector& detector, Perturber& perturber);

}  // namespace limra
