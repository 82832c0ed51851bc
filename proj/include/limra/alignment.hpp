#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "limra/core.hpp"

namespace limra {

/// Tolerance on |aligned + neutral + contradiction - 1|.
inline constexpr double kRowSumTolerance = 1e-4;

struct ProbTriple {
  double aligned = 0.0;
  double neutral = 0.0;
  double contradiction = 0.0;

  double sum() const noexcept { return aligned + neutral + contradiction; }
  bool operator==(const ProbTriple&) const = default;
};

/// S x C grid of class probabilities, S = claim sentences, C = context chunks.
/// Construction validates every cell; an invalid matrix cannot exist.
class AlignmentMatrix {
 public:
  AlignmentMatrix(std::size_t sentences, std::size_t chunks, std::vector<ProbTriple> cells);

  std::size_t sentences() const noexcept { return sentences_; }
  std::size_t chunks() const noexcept { return chunks_; }
  const ProbTriple& at(std::size_t sentence, std::size_t chunk) const { return cells_[sentence * chunks_ + chunk]; }
  std::span<const ProbTriple> row(std::size_t sentence) const {
    return std::span<const ProbTriple>(cells_).subspan(sentence * chunks_, chunks_);
  }
  std::span<const ProbTriple> cells() const noexcept { return cells_; }

  /// Parses [[[a,n,c], ...C], ...S]. Ragged rows or bad triples are errors.
  static AlignmentMatrix from_json(const json& probs);
  json to_json() const;

  bool operator==(const AlignmentMatrix&) const = default;

 private:
  std::size_t sentences_;
  std::size_t chunks_;
  std::vector<ProbTriple> cells_;
};

/// Throws InvariantError unless all entries are >= 0 and the sum is 1 within tolerance.
void validate_triple(const ProbTriple& p);

struct ScoreBreakdown {
  std::vector<double> per_sentence_max;
  std::vector<std::size_t> best_chunk_index;
  ConsistencyScore overall{0.0};

  bool operator==(const ScoreBreakdown&) const = default;
};

/// Max over chunks of the aligned probability per sentence, then the mean over
/// sentences. Ties go to the lowest chunk index. The mean is a compensated sum
/// taken in sentence order, so the result does not depend on scheduling.
ScoreBreakdown aggregate(const AlignmentMatrix& matrix);

/// Neumaier-compensated sum, in index order.
double compensated_sum(std::span<const double> values);

}  // namespace limra
