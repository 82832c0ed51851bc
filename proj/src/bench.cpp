#include "limra/bench.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "limra/hashing.hpp"
#include "limra/resources.hpp"

namespace limra {

namespace fs = std::filesystem;

namespace {

void check_inputs(const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size())
    throw DegenerateInputError("scores and labels differ in length (" + std::to_string(scores.size()) + " vs " +
                               std::to_string(labels.size()) + ")");
  for (double s : scores)
    if (std::isnan(s)) throw DegenerateInputError("NaN score");
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  if (pos == 0 || pos == labels.size()) throw SingleClassError();
}

bool has_both(const std::vector<bool>& labels) {
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  return pos > 0 && pos < labels.size();
}

std::string fmt_pct(std::optional<double> v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", *v * 100.0);
  return buf;
}

}  // namespace

double auc_roc(const std::vector<double>& scores, const std::vector<bool>& labels) {
  check_inputs(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sweep groups of equal score from low to high.
  std::uint64_t concordant = 0, tied = 0, neg_below = 0, pos_total = 0, neg_total = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t p = 0, q = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? p : q) += 1;
      ++j;
    }
    concordant += p * neg_below;
    tied += p * q;
    neg_below += q;
    pos_total += p;
    neg_total += q;
    i = j;
  }
  return static_cast<double>(2 * concordant + tied) / (2.0 * static_cast<double>(pos_total) * static_cast<double>(neg_total));
}

double balanced_accuracy(const std::vector<double>& scores, const std::vector<bool>& labels, double threshold) {
  check_inputs(scores, labels);
  std::size_t tp = 0, tn = 0, p = 0, n = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i]) {
      ++p;
      tp += predicted;
    } else {
      ++n;
      tn += !predicted;
    }
  }
  return (static_cast<double>(tp) / static_cast<double>(p) + static_cast<double>(tn) / static_cast<double>(n)) / 2.0;
}

ThresholdChoice select_threshold(const std::vector<double>& scores, const std::vector<bool>& labels,
                                 std::uint64_t split_seed, bool split) {
  check_inputs(scores, labels);
  ThresholdChoice choice;
  if (!split) return choice;

  std::vector<double> tune_s, held_s;
  std::vector<bool> tune_l, held_l;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool tune = unit_interval(splitmix64(split_seed ^ splitmix64(i))) < 0.5;
    (tune ? tune_s : held_s).push_back(scores[i]);
    (tune ? tune_l : held_l).push_back(labels[i]);
  }
  if (!has_both(tune_l) || !has_both(held_l)) return choice;

  std::vector<double> uniq = tune_s;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() < 2) return choice;

  double best_t = 0.0, best_ba = -1.0;
  for (std::size_t k = 0; k + 1 < uniq.size(); ++k) {
    const double t = uniq[k] + (uniq[k + 1] - uniq[k]) / 2.0;
    const double ba = balanced_accuracy(tune_s, tune_l, t);
    if (ba > best_ba) {
      best_ba = ba;
      best_t = t;
    }
  }
  choice.threshold = best_t;
  choice.heldout_balanced_accuracy = balanced_accuracy(held_s, held_l, best_t);
  choice.fallback = false;
  return choice;
}

// ---------------------------------------------------------------------------

BenchmarkManifest BenchmarkManifest::from_json(const json& doc) {
  BenchmarkManifest m;
  try {
    m.benchmark_id = doc.at("benchmark_id").get<std::string>();
    m.name = doc.value("name", m.benchmark_id);
    for (const auto& d : doc.at("datasets")) {
      ManifestDataset ds;
      ds.dataset_id = d.at("dataset_id").get<std::string>();
      ds.expected_total = d.at("expected_total").get<std::size_t>();
      ds.expected_consistent = d.at("expected_consistent").get<std::size_t>();
      if (ds.expected_consistent > ds.expected_total)
        throw ConfigError("manifest " + m.benchmark_id + ": " + ds.dataset_id + " has more consistent than total");
      m.datasets.push_back(std::move(ds));
    }
    if (doc.contains("avg_star_exclude")) m.avg_star_exclude = doc.at("avg_star_exclude").get<std::vector<std::string>>();
    m.note = doc.value("note", std::string{});
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("bad benchmark manifest: ") + ex.what());
  }
  if (m.datasets.empty()) throw ConfigError("manifest " + m.benchmark_id + " lists no datasets");
  return m;
}

std::size_t BenchmarkManifest::total() const noexcept {
  std::size_t t = 0;
  for (const auto& d : datasets) t += d.expected_total;
  return t;
}

std::size_t BenchmarkManifest::consistent() const noexcept {
  std::size_t t = 0;
  for (const auto& d : datasets) t += d.expected_consistent;
  return t;
}

BenchmarkManifest load_manifest(std::string_view id_or_path) {
  const std::string_view builtin = resources::benchmark_manifest(id_or_path);
  if (!builtin.empty()) return BenchmarkManifest::from_json(json::parse(builtin));
  const std::string path(id_or_path);
  std::ifstream in(path);
  if (!in) throw ConfigError("unknown benchmark '" + path + "' (not a built-in id or a readable file)");
  try {
    return BenchmarkManifest::from_json(json::parse(in));
  } catch (const json::parse_error& ex) {
    throw ConfigError("manifest " + path + ": " + ex.what());
  }
}

BenchmarkManifest scale_manifest(const BenchmarkManifest& manifest, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw ConfigError("scale factor must be positive");
  BenchmarkManifest out = manifest;
  for (auto& d : out.datasets) {
    const auto total = std::max<long long>(2, std::llround(static_cast<double>(d.expected_total) * factor));
    const auto cons = std::clamp<long long>(std::llround(static_cast<double>(d.expected_consistent) * factor), 1,
                                            total - 1);
    d.expected_total = static_cast<std::size_t>(total);
    d.expected_consistent = static_cast<std::size_t>(cons);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::optional<double> unweighted_mean(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

BenchmarkReport run_benchmark(const BenchmarkManifest& manifest, const std::string& data_dir, ScorerBackend& backend,
                              const BenchOptions& options) {
  BenchmarkReport report;
  report.benchmark_id = manifest.benchmark_id;
  report.name = manifest.name;

  std::vector<PairInput> pairs;
  std::vector<bool> labels;
  std::vector<std::size_t> offsets{0};
  for (const auto& d : manifest.datasets) {
    const fs::path file = fs::path(data_dir) / (d.dataset_id + ".jsonl");
    if (!fs::exists(file)) throw DataError("missing dataset file " + file.string());
    const auto records = read_benchmark_jsonl(file.string());
    std::size_t consistent = 0;
    for (const auto& r : records) {
      pairs.push_back({d.dataset_id + "/" + r.sample_id, r.context, r.claim});
      labels.push_back(r.consistent);
      consistent += r.consistent;
    }
    offsets.push_back(pairs.size());
    if (records.size() != d.expected_total || consistent != d.expected_consistent) {
      std::ostringstream w;
      w << d.dataset_id << ": loaded " << records.size() << "/" << consistent << " (total/consistent), expected "
        << d.expected_total << "/" << d.expected_consistent;
      if (options.count_check == CountCheck::kError) throw DataError("count mismatch in " + w.str());
      report.warnings.push_back(w.str());
    }
  }

  const BatchResult batch = score_batch(pairs, backend, options.scoring);

  report.datasets.resize(manifest.datasets.size());
  const auto n = static_cast<std::ptrdiff_t>(manifest.datasets.size());
  const int threads = static_cast<int>(std::max<std::size_t>(1, options.scoring.parallelism));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t di = 0; di < n; ++di) {
    DatasetMetrics& m = report.datasets[di];
    m.dataset_id = manifest.datasets[di].dataset_id;
    std::vector<double> s;
    std::vector<bool> l;
    for (std::size_t i = offsets[di]; i < offsets[di + 1]; ++i) {
      if (!batch.results[i].ok()) {
        ++m.failed_records;
        continue;
      }
      s.push_back(batch.results[i].score->overall.value());
      l.push_back(labels[i]);
    }
    m.n = s.size();
    m.n_consistent = static_cast<std::size_t>(std::count(l.begin(), l.end(), true));
    if (!has_both(l)) {
      m.flag = m.n == 0 ? "no scored records" : "single class";
      continue;
    }
    m.auc_roc = auc_roc(s, l);
    if (options.balanced_accuracy) {
      const ThresholdChoice t = select_threshold(s, l, options.split_seed ^ fnv1a64(m.dataset_id));
      m.threshold = t.threshold;
      m.balanced_accuracy = t.heldout_balanced_accuracy ? *t.heldout_balanced_accuracy
                                                        : balanced_accuracy(s, l, t.threshold);
    }
  }

  std::vector<double> all, star;
  for (const auto& m : report.datasets) {
    if (m.failed_records)
      report.warnings.push_back(m.dataset_id + ": " + std::to_string(m.failed_records) + " records failed to score");
    if (!m.auc_roc) {
      report.warnings.push_back(m.dataset_id + ": excluded from averages (" + m.flag + ")");
      continue;
    }
    all.push_back(*m.auc_roc);
    if (std::find(manifest.avg_star_exclude.begin(), manifest.avg_star_exclude.end(), m.dataset_id) ==
        manifest.avg_star_exclude.end())
      star.push_back(*m.auc_roc);
  }
  report.avg = unweighted_mean(all);
  if (options.avg_star) {
    report.avg_star = unweighted_mean(star);
    report.avg_star_excluded = manifest.avg_star_exclude;
  }
  return report;
}

EvalReport make_eval_report(std::vector<BenchmarkReport> benchmarks, BackendIdentity backend, std::string config_hash,
                            ordered_json config) {
  EvalReport r;
  r.benchmarks = std::move(benchmarks);
  r.backend = std::move(backend);
  r.config_hash = std::move(config_hash);
  r.config = std::move(config);
  std::vector<double> avgs;
  for (const auto& b : r.benchmarks)
    if (b.avg) avgs.push_back(*b.avg);
  r.overall_average = unweighted_mean(avgs);
  return r;
}

ordered_json EvalReport::to_json() const {
  auto opt = [](const std::optional<double>& v) -> ordered_json { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json j;
  j["backend"] = {{"kind", backend.kind}, {"model", backend.model}, {"version", backend.version}};
  j["config_hash"] = config_hash;
  if (!config.is_null()) j["config"] = config;
  ordered_json bs = ordered_json::array();
  for (const auto& b : benchmarks) {
    ordered_json bj;
    bj["benchmark_id"] = b.benchmark_id;
    bj["name"] = b.name;
    ordered_json ds = ordered_json::array();
    for (const auto& m : b.datasets) {
      ordered_json dj;
      dj["dataset_id"] = m.dataset_id;
      dj["n"] = m.n;
      dj["n_consistent"] = m.n_consistent;
      dj["auc_roc"] = opt(m.auc_roc);
      if (m.balanced_accuracy) {
        dj["balanced_accuracy"] = *m.balanced_accuracy;
        dj["threshold"] = opt(m.threshold);
      }
      if (m.failed_records) dj["failed_records"] = m.failed_records;
      if (!m.flag.empty()) dj["flag"] = m.flag;
      ds.push_back(std::move(dj));
    }
    bj["datasets"] = std::move(ds);
    bj["avg"] = opt(b.avg);
    if (b.avg_star || !b.avg_star_excluded.empty()) {
      bj["avg_star"] = opt(b.avg_star);
      bj["avg_star_excluded"] = b.avg_star_excluded;
    }
    bj["warnings"] = b.warnings;
    bs.push_back(std::move(bj));
  }
  j["benchmarks"] = std::move(bs);
  j["overall_average"] = opt(overall_average);
  return j;
}

std::string EvalReport::render_table() const {
  std::ostringstream o;
  o << "backend " << backend.kind << " (" << backend.model << " " << backend.version << "), config " << config_hash
    << "\n";
  for (const auto& b : benchmarks) {
    std::vector<std::string> head{b.name}, auc{"AUC"}, ba{"BA"};
    bool any_ba = false;
    for (const auto& m : b.datasets) {
      head.push_back(m.dataset_id);
      auc.push_back(fmt_pct(m.auc_roc));
      ba.push_back(fmt_pct(m.balanced_accuracy));
      any_ba = any_ba || m.balanced_accuracy.has_value();
    }
    head.push_back("AVG");
    auc.push_back(fmt_pct(b.avg));
    ba.push_back("");
    if (b.avg_star || !b.avg_star_excluded.empty()) {
      head.push_back("AVG*");
      auc.push_back(fmt_pct(b.avg_star));
      ba.push_back("");
    }
    std::vector<std::size_t> width(head.size());
    for (std::size_t c = 0; c < head.size(); ++c)
      width[c] = std::max({head[c].size(), auc[c].size(), ba[c].size()});
    auto row = [&](const std::vector<std::string>& cells) {
      for (std::size_t c = 0; c < cells.size(); ++c) {
        if (c) o << "  ";
        if (c == 0)
          o << std::left << std::setw(static_cast<int>(width[c])) << cells[c];
        else
          o << std::right << std::setw(static_cast<int>(width[c])) << cells[c];
      }
      o << "\n";
    };
    o << "\n";
    row(head);
    row(auc);
    if (any_ba) row(ba);
    for (const auto& w : b.warnings) o << "warning: " << w << "\n";
  }
  if (overall_average) o << "\noverall average " << fmt_pct(overall_average) << "\n";
  return o.str();
}

}  // namespace limra
