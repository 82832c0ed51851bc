#include "limra/config.hpp"

#include "limra/hashing.hpp"

namespace limra {

ordered_json GlobalConfig::to_json() const {
  ordered_json j;
  j["toolkit_version"] = kToolkitVersion;
  j["tokenizer"] = {{"scheme", "whitespace-punct"}, {"chunk_budget", chunk_budget}};
  j["abbreviations"] = abbreviations_path.empty() ? std::string("builtin") : abbreviations_path;
  j["backend"] = to_string(backend);
  j["endpoint"] = endpoint;
  j["seed"] = seed;
  j["paths"] = {{"fixture", fixture_path}, {"data_dir", data_dir}};
  return j;
}

std::string GlobalConfig::hash() const {
  ordered_json j = to_json();
  j.erase("paths");
  return hex64(fnv1a64(j.dump()));
}

}  // namespace limra
