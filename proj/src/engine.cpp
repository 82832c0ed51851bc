#include "limra/engine.hpp"

#include <mutex>

#include <omp.h>

namespace limra {

namespace {

// Wraps a backend that cannot take concurrent calls so every align() runs alone.
class SerializedBackend final : public ScorerBackend {
 public:
  explicit SerializedBackend(ScorerBackend& inner) : inner_(inner) {}
  AlignmentMatrix align(const AlignRequest& request) override {
    std::lock_guard lock(mutex_);
    return inner_.align(request);
  }
  bool concurrent() const noexcept override { return true; }
  BackendIdentity identity() const override { return inner_.identity(); }

 private:
  ScorerBackend& inner_;
  std::mutex mutex_;
};

ScoreResult score_one(const PairInput& record, ScorerBackend& backend, const ScoringOptions& options) {
  ScoreResult result;
  result.id = record.id;
  try {
    result.score = score_pair(record.context, record.claim, backend, options.tokenizer, record.id,
                              *options.abbreviations);
  } catch (const Error& e) {
    result.error = e.what();
    result.error_category = e.category();
  } catch (const std::exception& e) {
    result.error = std::string("sample '") + record.id + "': " + e.what();
    result.error_category = ErrorCategory::kBackend;
  }
  return result;
}

void collect_failures(BatchResult& batch) {
  for (const auto& r : batch.results) {
    if (!r.ok()) batch.failed_ids.push_back(r.id);
  }
}

}  // namespace

ScoreBreakdown score_pair(std::string_view context, std::string_view claim, ScorerBackend& backend,
                          const TokenizerSpec& spec, std::string_view sample_id,
                          const AbbreviationList& abbreviations) {
  const std::string id(sample_id);
  try {
    ChunkedInput input = segment(context, claim, spec, abbreviations);
    if (input.sentences.empty()) throw DegenerateInputError("claim is empty after sentence splitting");
    if (input.chunks.empty()) throw DegenerateInputError("context is empty after chunking");
    AlignmentMatrix matrix = backend.align({sample_id, input.chunks, input.sentences});
    if (matrix.sentences() != input.sentences.size() || matrix.chunks() != input.chunks.size()) {
      throw ShapeError(input.sentences.size(), input.chunks.size(), matrix.sentences(), matrix.chunks());
    }
    return aggregate(matrix);
  } catch (const ScoringError&) {
    throw;
  } catch (const Error& e) {
    throw ScoringError(id, e.category(), e.what());
  }
}

BatchResult score_batch(std::span<const PairInput> records, ScorerBackend& backend, const ScoringOptions& options) {
  if (options.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  SerializedBackend serialized(backend);
  ScorerBackend& target = backend.concurrent() ? backend : static_cast<ScorerBackend&>(serialized);

  BatchResult batch;
  batch.results.resize(records.size());
  const auto n = static_cast<std::ptrdiff_t>(records.size());
  const int threads = static_cast<int>(options.parallelism);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    batch.results[i] = score_one(records[i], target, options);
  }
  collect_failures(batch);
  return batch;
}

BatchResult score_batch_serial(std::span<const PairInput> records, ScorerBackend& backend,
                               const ScoringOptions& options) {
  if (options.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  BatchResult batch;
  batch.results.reserve(records.size());
  for (const auto& record : records) batch.results.push_back(score_one(record, backend, options));
  collect_failures(batch);
  return batch;
}

}  // namespace limra
