#pragma once

#include <string_view>

// Copies of the files under data/, embedded at build time.
namespace limra::resources {

std::string_view abbreviations();
std::string_view registry();
std::string_view prompt_name_change();
std::string_view prompt_num_change();
std::string_view prompt_num_rephrase();
/// Benchmark manifest JSON by id (summac, true, summedits, llmr); empty if unknown.
std::string_view benchmark_manifest(std::string_view benchmark_id);

}  // namespace limra::resources
