#include "limra/resources.hpp"

#include "limra_resources_data.hpp"

namespace limra::resources {

std::string_view abbreviations() { return embedded::kAbbreviations; }
std::string_view registry() { return embedded::kRegistry; }
std::string_view prompt_name_change() { return embedded::kPromptNameChange; }
std::string_view prompt_num_change() { return embedded::kPromptNumChange; }
std::string_view prompt_num_rephrase() { return embedded::kPromptNumRephrase; }

std::string_view benchmark_manifest(std::string_view benchmark_id) {
  if (benchmark_id == "summac") return embedded::kBenchSummac;
  if (benchmark_id == "true") return embedded::kBenchTrue;
  if (benchmark_id == "summedits") return embedded::kBenchSummedits;
  if (benchmark_id == "llmr") return embedded::kBenchLlmr;
  return {};
}

}  // namespace limra::resources
