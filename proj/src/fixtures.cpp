#include <cmath>
#include <filesystem>
#include <fstream>

#include "limra/bench.hpp"
#include "limra/hashing.hpp"

namespace limra {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSites[] = {"Alder", "Birch", "Cedar", "Dunmore", "Elmira", "Fenwick", "Garrow", "Hollis"};
constexpr const char* kThings[] = {"rainfall", "traffic", "sales", "visitors", "output", "turnout"};

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() { return state_ = splitmix64(state_); }
  double uniform() { return unit_interval(next()); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

 private:
  std::uint64_t state_;
};

double round4(double x) { return std::round(x * 1e4) / 1e4; }

}  // namespace

FixtureCorpus write_fixture_corpus(const BenchmarkManifest& manifest, const std::string& out_dir, std::uint64_t seed) {
  fs::create_directories(out_dir);
  FixtureCorpus corpus;
  ordered_json alignments = ordered_json::object();

  for (const auto& d : manifest.datasets) {
    Stream rng(seed ^ fnv1a64(manifest.benchmark_id + "/" + d.dataset_id));

    // Exactly expected_consistent positives, placed by a seeded Fisher-Yates.
    std::vector<bool> consistent(d.expected_total, false);
    for (std::size_t i = 0; i < d.expected_consistent; ++i) consistent[i] = true;
    for (std::size_t i = consistent.size(); i > 1; --i) {
      const std::size_t j = rng.below(i);
      const bool tmp = consistent[i - 1];
      consistent[i - 1] = consistent[j];
      consistent[j] = tmp;
    }

    const fs::path file = fs::path(out_dir) / (d.dataset_id + ".jsonl");
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + file.string());
    for (std::size_t i = 0; i < d.expected_total; ++i) {
      const std::string site = kSites[rng.below(std::size(kSites))];
      const std::string thing = kThings[rng.below(std::size(kThings))];
      const std::size_t value = 10 + rng.below(990);
      const std::size_t day = 1 + rng.below(28);

      BenchmarkRecord r;
      r.dataset_id = d.dataset_id;
      r.sample_id = d.dataset_id + "-" + std::to_string(i);
      r.consistent = consistent[i];
      r.context = "Report " + std::to_string(i) + " covers the " + site + " station. The " + thing + " there was " +
                  std::to_string(value) + " on day " + std::to_string(day) + ".";
      r.claim = "The " + thing + " there was " + std::to_string(r.consistent ? value : value + 1 + rng.below(9)) +
                " on day " + std::to_string(day) + ".";
      out << to_jsonl(r) << '\n';

      // One claim sentence against one chunk. Positives lean high but overlap negatives.
      const double a = round4(r.consistent ? 0.30 + 0.65 * rng.uniform() : 0.02 + 0.65 * rng.uniform());
      const double n = round4((1.0 - a) / 2.0);
      alignments[d.dataset_id + "/" + r.sample_id] = ordered_json::array({ordered_json::array({{a, n, 1.0 - a - n}})});
    }
    if (!out) throw DataError("write failed for " + file.string());
    corpus.files.push_back(file.string());
  }

  ordered_json doc;
  doc["model"] = "fixture-stand-in";
  doc["version"] = "1";
  doc["alignments"] = std::move(alignments);
  const fs::path apath = fs::path(out_dir) / "alignments.json";
  std::ofstream a(apath, std::ios::binary | std::ios::trunc);
  if (!a) throw DataError("cannot write " + apath.string());
  a << doc.dump() << '\n';
  corpus.alignments_path = apath.string();
  return corpus;
}

}  // namespace limra
