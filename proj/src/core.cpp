#include "limra/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "limra/resources.hpp"

namespace limra {

const char* to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kBackend: return "backend";
    case ErrorCategory::kData: return "data";
    case ErrorCategory::kDegenerate: return "degenerate";
  }
  return "unknown";
}

std::string_view to_string(Label3 label) noexcept {
  switch (label) {
    case Label3::kAligned: return "aligned";
    case Label3::kNeutral: return "neutral";
    case Label3::kContradiction: return "contradiction";
  }
  return "aligned";
}

std::optional<Label3> parse_label3(std::string_view text) {
  if (text == "aligned") return Label3::kAligned;
  if (text == "neutral") return Label3::kNeutral;
  if (text == "contradiction") return Label3::kContradiction;
  return std::nullopt;
}

std::string_view to_string(LabelScheme scheme) noexcept {
  switch (scheme) {
    case LabelScheme::kBinaryContradiction: return "binary-contradiction";
    case LabelScheme::kBinaryNeutral: return "binary-neutral";
    case LabelScheme::kThreeWay: return "three-way";
    case LabelScheme::kRegression: return "regression";
  }
  return "three-way";
}

LabelScheme parse_label_scheme(std::string_view text) {
  const std::string key = normalize_label_text(text);
  if (key == "binarycontradiction") return LabelScheme::kBinaryContradiction;
  if (key == "binaryneutral") return LabelScheme::kBinaryNeutral;
  if (key == "threeway") return LabelScheme::kThreeWay;
  if (key == "regression") return LabelScheme::kRegression;
  throw ConfigError("unknown label_scheme '" + std::string(text) + "'");
}

ConsistencyScore::ConsistencyScore(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DegenerateInputError("consistency score out of [0,1]: " + std::to_string(value));
  }
}

void LabelRegistry::add(std::string dataset_id, LabelScheme scheme) {
  schemes_.insert_or_assign(std::move(dataset_id), scheme);
}

bool LabelRegistry::contains(std::string_view dataset_id) const { return schemes_.find(dataset_id) != schemes_.end(); }

LabelScheme LabelRegistry::scheme_of(std::string_view dataset_id) const {
  auto it = schemes_.find(dataset_id);
  if (it == schemes_.end()) throw UnknownDatasetError(std::string(dataset_id));
  return it->second;
}

std::vector<std::string> LabelRegistry::dataset_ids() const {
  std::vector<std::string> ids;
  ids.reserve(schemes_.size());
  for (const auto& [id, scheme] : schemes_) ids.push_back(id);
  return ids;
}

LabelRegistry LabelRegistry::from_json(const json& registry) {
  if (!registry.is_array()) throw ConfigError("registry must be a JSON array");
  LabelRegistry out;
  for (const auto& entry : registry) {
    if (!entry.contains("dataset_id") || !entry.contains("label_scheme")) {
      throw ConfigError("registry entry needs dataset_id and label_scheme");
    }
    out.add(entry.at("dataset_id").get<std::string>(), parse_label_scheme(entry.at("label_scheme").get<std::string>()));
  }
  return out;
}

const LabelRegistry& LabelRegistry::builtin() {
  static const LabelRegistry registry = from_json(json::parse(resources::registry()));
  return registry;
}

std::string normalize_label_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    if (c == '-' || c == '_' || std::isspace(c)) continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

namespace {

// Spellings seen across the source datasets, after normalize_label_text.
const std::unordered_set<std::string>& positive_spellings() {
  static const std::unordered_set<std::string> s{"aligned",   "entailment", "entailed", "entails",   "supports",
                                                 "supported", "faithful",   "consistent", "paraphrase", "duplicate",
                                                 "true",      "yes",        "1",        "correct"};
  return s;
}

const std::unordered_set<std::string>& negative_spellings() {
  static const std::unordered_set<std::string> s{"notaligned",   "notentailment", "nonentailment", "notparaphrase",
                                                 "notduplicate", "false",         "no",            "0",
                                                 "incorrect",    "unfaithful",    "inconsistent"};
  return s;
}

const std::unordered_set<std::string>& neutral_spellings() {
  static const std::unordered_set<std::string> s{"neutral", "noevidence", "notenoughinfo", "nei", "unknown"};
  return s;
}

const std::unordered_set<std::string>& contradiction_spellings() {
  static const std::unordered_set<std::string> s{"contradiction", "contradict", "contradicts", "contradicted",
                                                 "refutes",       "refuted"};
  return s;
}

Label3 unify_categorical(LabelScheme scheme, const std::string& raw) {
  const std::string key = normalize_label_text(raw);
  const bool positive = positive_spellings().count(key) > 0;
  const bool negative = negative_spellings().count(key) > 0;
  const bool neutral = neutral_spellings().count(key) > 0;
  const bool contradiction = contradiction_spellings().count(key) > 0;

  if (positive) return Label3::kAligned;
  switch (scheme) {
    case LabelScheme::kBinaryContradiction:
      if (negative || contradiction) return Label3::kContradiction;
      break;
    case LabelScheme::kBinaryNeutral:
      if (negative || neutral) return Label3::kNeutral;
      break;
    case LabelScheme::kThreeWay:
      if (neutral) return Label3::kNeutral;
      if (contradiction) return Label3::kContradiction;
      break;
    case LabelScheme::kRegression:
      break;
  }
  throw LabelSchemeError("raw_label", "'" + raw + "' is not a legal " + std::string(to_string(scheme)) + " label");
}

}  // namespace

Label3 unify_label(const LabelRegistry& registry, std::string_view dataset_id, const RawLabel& raw_label) {
  const LabelScheme scheme = registry.scheme_of(dataset_id);
  if (scheme == LabelScheme::kRegression) {
    const double* value = std::get_if<double>(&raw_label);
    if (value == nullptr) {
      throw LabelSchemeError("raw_label", "regression dataset '" + std::string(dataset_id) + "' needs a real label");
    }
    if (!(*value >= 0.0 && *value <= 1.0)) {
      throw LabelSchemeError("raw_label", "regression value " + std::to_string(*value) + " outside [0,1]");
    }
    if (*value >= 0.45) return Label3::kAligned;
    if (*value >= 0.3) return Label3::kNeutral;
    return Label3::kContradiction;
  }
  const std::string* text = std::get_if<std::string>(&raw_label);
  if (text == nullptr) {
    throw LabelSchemeError("raw_label", "categorical dataset '" + std::string(dataset_id) + "' needs a string label");
  }
  return unify_categorical(scheme, *text);
}

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string to_jsonl(const UnifiedSample& sample) {
  ordered_json j;
  j["dataset"] = sample.dataset_id;
  j["id"] = sample.sample_id;
  j["context"] = sample.context;
  j["claim"] = sample.claim;
  j["label"] = std::string(to_string(sample.label));
  return j.dump();
}

std::string to_jsonl(const BenchmarkRecord& record) {
  ordered_json j;
  j["dataset"] = record.dataset_id;
  j["id"] = record.sample_id;
  j["context"] = record.context;
  j["claim"] = record.claim;
  j["consistent"] = record.consistent;
  return j.dump();
}

namespace {

std::string required_string(const json& object, const char* field) {
  auto it = object.find(field);
  if (it == object.end() || !it->is_string()) {
    throw DataError(std::string("missing or non-string field '") + field + "'");
  }
  return it->get<std::string>();
}

}  // namespace

UnifiedSample unified_sample_from_json(const json& object) {
  UnifiedSample s;
  s.dataset_id = required_string(object, "dataset");
  s.sample_id = required_string(object, "id");
  s.context = required_string(object, "context");
  s.claim = required_string(object, "claim");
  const std::string label = required_string(object, "label");
  auto parsed = parse_label3(label);
  if (!parsed) throw DataError("label '" + label + "' is not aligned|neutral|contradiction");
  s.label = *parsed;
  return s;
}

BenchmarkRecord benchmark_record_from_json(const json& object) {
  BenchmarkRecord r;
  r.dataset_id = required_string(object, "dataset");
  r.sample_id = required_string(object, "id");
  r.context = required_string(object, "context");
  r.claim = required_string(object, "claim");
  auto it = object.find("consistent");
  if (it == object.end() || !it->is_boolean()) throw DataError("missing or non-boolean field 'consistent'");
  r.consistent = it->get<bool>();
  return r;
}

UnifiedSample parse_unified_sample(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError("line is not a JSON object");
  return unified_sample_from_json(j);
}

BenchmarkRecord parse_benchmark_record(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError("line is not a JSON object");
  return benchmark_record_from_json(j);
}

std::vector<BenchmarkRecord> read_benchmark_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<BenchmarkRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      out.push_back(parse_benchmark_record(line));
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<UnifiedSample> read_unified_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<UnifiedSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      out.push_back(parse_unified_sample(line));
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace limra
