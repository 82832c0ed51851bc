#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "limra/alignment.hpp"
#include "limra/backends.hpp"
#include "limra/segmentation.hpp"

namespace limra {

struct ScoringOptions {
  TokenizerSpec tokenizer;
  const AbbreviationList* abbreviations = &AbbreviationList::builtin();
  std::size_t parallelism = 1;
};

/// Chunks the context, splits the claim, aligns, aggregates. Failures come
/// back as ScoringError carrying the sample id and the cause's category.
ScoreBreakdown score_pair(std::string_view context, std::string_view claim, ScorerBackend& backend,
                          const TokenizerSpec& spec = {}, std::string_view sample_id = {},
                          const AbbreviationList& abbreviations = AbbreviationList::builtin());

struct PairInput {
  std::string id;
  std::string context;
  std::string claim;
};

struct ScoreResult {
  std::string id;
  std::optional<ScoreBreakdown> score;
  std::string error;  // empty on success
  std::optional<ErrorCategory> error_category;

  bool ok() const noexcept { return score.has_value(); }
  bool operator==(const ScoreResult&) const = default;
};

struct BatchResult {
  std::vector<ScoreResult> results;  // input order
  std::vector<std::string> failed_ids;
};

/// Scores records on up to `options.parallelism` threads. Per-record failures
/// are collected, never thrown. Output is identical for any thread count.
/// Backends that are not concurrent see one call at a time.
BatchResult score_batch(std::span<const PairInput> records, ScorerBackend& backend, const ScoringOptions& options);
/// Single-threaded reference for score_batch.
BatchResult score_batch_serial(std::span<const PairInput> records, ScorerBackend& backend,
                               const ScoringOptions& options);

}  // namespace limra
