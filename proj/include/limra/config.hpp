#pragma once

#include <cstdint>
#include <string>

#include "limra/backends.hpp"
#include "limra/core.hpp"

namespace limra {

inline constexpr std::string_view kToolkitVersion = "0.3.0";
inline constexpr std::uint64_t kDefaultSeed = 2027;

/// Everything that can change an artifact. Its hash goes into every output.
struct GlobalConfig {
  std::size_t chunk_budget = kDefaultChunkBudget;
  std::string abbreviations_path;  // empty: built-in list
  BackendKind backend = BackendKind::kLexical;
  std::string endpoint;
  std::string fixture_path;
  std::size_t parallelism = 1;
  std::uint64_t seed = kDefaultSeed;
  std::string data_dir;

  /// Keys in a fixed order. parallelism is left out on purpose: outputs do not depend on it.
  ordered_json to_json() const;
  /// hex of FNV-1a over the compact to_json() dump without "paths", so a
  /// relocated data directory keeps the same hash.
  std::string hash() const;
};

}  // namespace limra
