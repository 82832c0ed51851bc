#include "limra/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace limra {

void validate_triple(const ProbTriple& p) {
  const bool finite = std::isfinite(p.aligned) && std::isfinite(p.neutral) && std::isfinite(p.contradiction);
  if (!finite || p.aligned < 0.0 || p.neutral < 0.0 || p.contradiction < 0.0) {
    throw InvariantError("probability triple has a negative or non-finite entry");
  }
  if (std::abs(p.sum() - 1.0) > kRowSumTolerance) {
    throw InvariantError("probability triple sums to " + std::to_string(p.sum()) + ", expected 1");
  }
}

AlignmentMatrix::AlignmentMatrix(std::size_t sentences, std::size_t chunks, std::vector<ProbTriple> cells)
    : sentences_(sentences), chunks_(chunks), cells_(std::move(cells)) {
  if (sentences_ == 0 || chunks_ == 0) {
    throw DegenerateInputError("alignment matrix needs at least one sentence and one chunk");
  }
  if (cells_.size() != sentences_ * chunks_) {
    throw ShapeError("alignment matrix holds " + std::to_string(cells_.size()) + " cells, expected " +
                     std::to_string(sentences_ * chunks_));
  }
  for (const auto& cell : cells_) validate_triple(cell);
}

AlignmentMatrix AlignmentMatrix::from_json(const json& probs) {
  if (!probs.is_array() || probs.empty()) throw ShapeError("probs must be a non-empty array of rows");
  const std::size_t s = probs.size();
  const auto& first = probs.front();
  if (!first.is_array() || first.empty()) throw ShapeError("probs rows must be non-empty arrays");
  const std::size_t c = first.size();
  std::vector<ProbTriple> cells;
  cells.reserve(s * c);
  for (std::size_t i = 0; i < s; ++i) {
    const auto& row = probs[i];
    if (!row.is_array() || row.size() != c) {
      throw ShapeError("probs row " + std::to_string(i) + " has " + std::to_string(row.is_array() ? row.size() : 0) +
                       " cells, expected " + std::to_string(c));
    }
    for (const auto& cell : row) {
      if (!cell.is_array() || cell.size() != 3) throw ShapeError("probs cell must be a 3-vector");
      for (const auto& v : cell) {
        if (!v.is_number()) throw InvariantError("probs cell holds a non-number");
      }
      cells.push_back({cell[0].get<double>(), cell[1].get<double>(), cell[2].get<double>()});
    }
  }
  return AlignmentMatrix(s, c, std::move(cells));
}

json AlignmentMatrix::to_json() const {
  json rows = json::array();
  for (std::size_t i = 0; i < sentences_; ++i) {
    json row = json::array();
    for (const auto& p : this->row(i)) row.push_back({p.aligned, p.neutral, p.contradiction});
    rows.push_back(std::move(row));
  }
  return rows;
}

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

ScoreBreakdown aggregate(const AlignmentMatrix& matrix) {
  ScoreBreakdown out;
  out.per_sentence_max.reserve(matrix.sentences());
  out.best_chunk_index.reserve(matrix.sentences());
  for (std::size_t i = 0; i < matrix.sentences(); ++i) {
    const auto row = matrix.row(i);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (row[c].aligned > row[best].aligned) best = c;
    }
    out.per_sentence_max.push_back(row[best].aligned);
    out.best_chunk_index.push_back(best);
  }
  const double mean = compensated_sum(out.per_sentence_max) / static_cast<double>(matrix.sentences());
  // The aligned entries may exceed 1 by up to the row-sum tolerance.
  out.overall = ConsistencyScore(std::min(1.0, std::max(0.0, mean)));
  return out;
}

}  // namespace limra
