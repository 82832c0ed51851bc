#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "limra/error.hpp"

namespace limra {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

enum class Label3 { kAligned, kNeutral, kContradiction };

std::string_view to_string(Label3 label) noexcept;
/// Parses the canonical spellings "aligned", "neutral", "contradiction".
std::optional<Label3> parse_label3(std::string_view text);

/// How a source dataset spells its labels.
enum class LabelScheme { kBinaryContradiction, kBinaryNeutral, kThreeWay, kRegression };

std::string_view to_string(LabelScheme scheme) noexcept;
LabelScheme parse_label_scheme(std::string_view text);

using RawLabel = std::variant<std::string, double>;

struct RawSample {
  std::string dataset_id;
  std::map<std::string, std::string> payload;
  RawLabel raw_label;
};

struct UnifiedSample {
  std::string context;
  std::string claim;
  Label3 label = Label3::kAligned;
  std::string dataset_id;
  std::string sample_id;

  bool operator==(const UnifiedSample&) const = default;
};

struct BenchmarkRecord {
  std::string context;
  std::string claim;
  bool consistent = false;
  std::string dataset_id;
  std::string sample_id;

  bool operator==(const BenchmarkRecord&) const = default;
};

/// Scalar consistency score, always inside [0, 1].
class ConsistencyScore {
 public:
  explicit ConsistencyScore(double value);
  double value() const noexcept { return value_; }
  bool operator==(const ConsistencyScore&) const = default;

 private:
  double value_;
};

/// Dataset id -> label scheme. Unknown ids are errors, never defaulted.
class LabelRegistry {
 public:
  LabelRegistry() = default;

  void add(std::string dataset_id, LabelScheme scheme);
  bool contains(std::string_view dataset_id) const;
  LabelScheme scheme_of(std::string_view dataset_id) const;
  std::size_t size() const noexcept { return schemes_.size(); }
  std::vector<std::string> dataset_ids() const;

  /// Reads the `dataset_id` and `label_scheme` fields of a registry array.
  static LabelRegistry from_json(const json& registry);
  /// Registry compiled from the shipped data/registry.json.
  static const LabelRegistry& builtin();

 private:
  std::map<std::string, LabelScheme, std::less<>> schemes_;
};

/// Lowercases and drops '-', '_' and spaces so "Not-Aligned" == "not_aligned".
std::string normalize_label_text(std::string_view text);

Label3 unify_label(const LabelRegistry& registry, std::string_view dataset_id, const RawLabel& raw_label);

/// True when the text has no non-whitespace characters.
bool is_blank(std::string_view text);

// JSONL records. Field order is fixed so serialization is byte-stable.
std::string to_jsonl(const UnifiedSample& sample);
std::string to_jsonl(const BenchmarkRecord& record);
UnifiedSample unified_sample_from_json(const json& object);
BenchmarkRecord benchmark_record_from_json(const json& object);
UnifiedSample parse_unified_sample(std::string_view line);
BenchmarkRecord parse_benchmark_record(std::string_view line);

/// Reads a whole JSONL file of benchmark records, skipping blank lines.
std::vector<BenchmarkRecord> read_benchmark_jsonl(const std::string& path);
std::vector<UnifiedSample> read_unified_jsonl(const std::string& path);

}  // namespace limra
