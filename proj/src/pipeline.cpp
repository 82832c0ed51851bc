#include "limra/pipeline.hpp"

#include <omp.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace limra {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("write failed for " + path.string());
}

const std::string* first_string(const json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    auto it = j.find(k);
    if (it != j.end() && it->is_string()) return &it->get_ref<const std::string&>();
  }
  return nullptr;
}

std::string record_id(const json& j, std::size_t line_no) {
  auto it = j.find("id");
  if (it != j.end()) {
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
  }
  return std::to_string(line_no);
}

bool is_article(std::string_view w) { return w == "a" || w == "an" || w == "the"; }

}  // namespace

// ---------------------------------------------------------------------------
// registry

std::vector<DatasetRegistryEntry> parse_registry(const json& registry) {
  if (!registry.is_array()) throw ConfigError("registry must be a JSON array");
  std::vector<DatasetRegistryEntry> out;
  for (const auto& item : registry) {
    if (!item.is_object()) throw ConfigError("registry entries must be objects");
    DatasetRegistryEntry e;
    try {
      e.dataset_id = item.at("dataset_id").get<std::string>();
      e.label_scheme = parse_label_scheme(item.at("label_scheme").get<std::string>());
      e.enabled = item.value("enabled", true);
      e.is_qa = item.value("is_qa", false);
      if (item.contains("cap")) {
        const auto& cap = item.at("cap");
        if (!cap.is_number_integer() || cap.get<long long>() <= 0)
          throw ConfigError("cap of " + e.dataset_id + " must be a positive integer");
        e.cap = cap.get<std::size_t>();
      }
      e.source = item.value("source", std::string{});
      e.note = item.value("note", std::string{});
    } catch (const json::exception& ex) {
      throw ConfigError(std::string("bad registry entry: ") + ex.what());
    }
    if (e.dataset_id.empty()) throw ConfigError("registry entry with empty dataset_id");
    for (const auto& prev : out)
      if (prev.dataset_id == e.dataset_id) throw ConfigError("duplicate dataset_id " + e.dataset_id);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<DatasetRegistryEntry> load_registry(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& ex) {
    throw ConfigError("registry " + path + " is not valid JSON: " + ex.what());
  } catch (const DataError& ex) {
    throw ConfigError(ex.what());
  }
  auto entries = parse_registry(doc);
  const fs::path base = fs::path(path).parent_path();
  for (auto& e : entries)
    if (!e.source.empty() && fs::path(e.source).is_relative()) e.source = (base / e.source).string();
  return entries;
}

LabelRegistry to_label_registry(const std::vector<DatasetRegistryEntry>& entries) {
  LabelRegistry r;
  for (const auto& e : entries) r.add(e.dataset_id, e.label_scheme);
  return r;
}

// ---------------------------------------------------------------------------
// filters

bool filter_by_length(const UnifiedSample& sample, std::size_t max_tokens, const TokenizerSpec& spec) {
  if (is_blank(sample.context)) return false;
  return count_tokens(sample.context, spec) < max_tokens;
}

std::string qa_to_claim(const QaSample& sample, std::string_view answer) {
  if (is_blank(sample.question)) throw DataError("QA sample has an empty question");
  if (is_blank(answer)) throw DataError("QA sample has an empty answer");
  std::string claim = sample.question;
  claim += ' ';
  claim += answer;
  return claim;
}

std::string normalize_answer(std::string_view text) {
  std::string stripped;
  stripped.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t cp = text::next_code_point(text, pos);
    if (text::is_unicode_space(cp)) {
      stripped += ' ';
    } else if (!text::is_punctuation(cp)) {
      stripped.append(text.substr(start, pos - start));
    }
  }
  stripped = text::to_lower_ascii(stripped);
  std::istringstream words(stripped);
  std::string w, out;
  while (words >> w) {
    if (is_article(w)) continue;
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

CharNgramEmbedder::CharNgramEmbedder(std::size_t n) : n_(n) {
  if (n_ == 0) throw ConfigError("n-gram size must be positive");
}

std::map<std::string, double> CharNgramEmbedder::embed(std::string_view text) const {
  const std::string norm = normalize_answer(text);
  std::map<std::string, double> v;
  if (norm.empty()) return v;
  if (norm.size() < n_) {
    v[norm] = 1.0;
    return v;
  }
  for (std::size_t i = 0; i + n_ <= norm.size(); ++i) v[norm.substr(i, n_)] += 1.0;
  return v;
}

double cosine(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [k, x] : a) {
    na += x * x;
    auto it = b.find(k);
    if (it != b.end()) dot += x * it->second;
  }
  for (const auto& [k, y] : b) nb += y * y;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::string> filter_fake_answers(std::string_view true_answer, const std::vector<std::string>& fake_answers,
                                             const TextEmbedder& embedder, double threshold) {
  const std::string truth = normalize_answer(true_answer);
  const auto truth_vec = embedder.embed(true_answer);
  std::vector<std::string> kept;
  for (const auto& fake : fake_answers) {
    const std::string f = normalize_answer(fake);
    if (f.empty() || f == truth) continue;
    if (!truth.empty() && (f.find(truth) != std::string::npos || truth.find(f) != std::string::npos)) continue;
    if (cosine(truth_vec, embedder.embed(fake)) >= threshold) continue;
    kept.push_back(fake);
  }
  return kept;
}

std::vector<UnifiedSample> cap_dataset(std::vector<UnifiedSample> samples, std::size_t cap) {
  if (cap == 0) throw ConfigError("cap must be positive");
  if (samples.size() > cap) samples.resize(cap);
  return samples;
}

// ---------------------------------------------------------------------------
// stats + manifest

void FilterStats::merge(const FilterStats& o) {
  input += o.input;
  kept += o.kept;
  dropped_by_length += o.dropped_by_length;
  dropped_by_similarity += o.dropped_by_similarity;
  dropped_by_cap += o.dropped_by_cap;
  dropped_malformed += o.dropped_malformed;
}

bool FilterStats::balanced() const noexcept {
  return input == kept + dropped_by_length + dropped_by_similarity + dropped_by_cap + dropped_malformed;
}

ordered_json FilterStats::to_json() const {
  ordered_json j;
  j["input"] = input;
  j["kept"] = kept;
  j["dropped_by_length"] = dropped_by_length;
  j["dropped_by_similarity"] = dropped_by_similarity;
  j["dropped_by_cap"] = dropped_by_cap;
  j["dropped_malformed"] = dropped_malformed;
  return j;
}

std::string render_training_manifest(const TrainingManifest& m) {
  std::ostringstream o;
  o << "{\n"
    << "  \"samples_per_dataset\": " << m.samples_per_dataset << ",\n"
    << "  \"max_context_length\": " << m.max_context_length << ",\n"
    << "  \"lr\": " << m.lr << ",\n"
    << "  \"seed\": " << m.seed << ",\n"
    << "  \"train_batch\": " << m.train_batch << ",\n"
    << "  \"accumulate_grad_batch\": " << m.accumulate_grad_batch << ",\n"
    << "  \"epoch\": " << m.epoch << ",\n"
    << "  \"warmup_ratio\": " << m.warmup_ratio << ",\n"
    << "  \"weight_decay\": " << m.weight_decay << ",\n"
    << "  \"adam_epsilon\": " << m.adam_epsilon << "\n"
    << "}\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// one dataset

std::vector<UnifiedSample> clean_dataset(const DatasetRegistryEntry& entry, std::string_view jsonl,
                                         const PipelineConfig& config, FilterStats& stats) {
  CharNgramEmbedder default_embedder(3);
  const TextEmbedder& embedder = config.embedder ? *config.embedder : default_embedder;
  LabelRegistry labels;
  labels.add(entry.dataset_id, entry.label_scheme);

  std::vector<UnifiedSample> candidates;
  auto malformed = [&](std::size_t line_no, const std::string& why) {
    ++stats.input;
    ++stats.dropped_malformed;
    spdlog::warn("{}:{}: skipping malformed record: {}", entry.dataset_id, line_no, why);
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t nl = jsonl.find('\n', pos);
    if (nl == std::string_view::npos) nl = jsonl.size();
    std::string_view line = jsonl.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (is_blank(line)) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      malformed(line_no, ex.what());
      continue;
    }
    if (!j.is_object()) {
      malformed(line_no, "not a JSON object");
      continue;
    }

    try {
      // Output of an earlier run: already unified, pass it through.
      if (j.contains("dataset")) {
        UnifiedSample s = unified_sample_from_json(j);
        if (s.dataset_id != entry.dataset_id)
          throw DataError("record belongs to dataset " + s.dataset_id);
        ++stats.input;
        candidates.push_back(std::move(s));
        continue;
      }

      const std::string id = record_id(j, line_no);
      if (entry.is_qa) {
        QaSample qa;
        const std::string* passage = first_string(j, {"passage", "context"});
        const std::string* question = first_string(j, {"question"});
        const std::string* answer = first_string(j, {"answer", "true_answer"});
        if (!passage || !question || !answer) throw DataError("QA record needs passage, question and answer");
        qa.passage = *passage;
        qa.question = *question;
        qa.true_answer = *answer;
        if (auto it = j.find("fake_answers"); it != j.end()) {
          if (!it->is_array()) throw DataError("fake_answers must be an array");
          for (const auto& f : *it) {
            if (!f.is_string()) throw DataError("fake_answers must hold strings");
            qa.fake_answers.push_back(f.get<std::string>());
          }
        }
        std::vector<UnifiedSample> built;
        built.push_back({qa.passage, qa_to_claim(qa, qa.true_answer), Label3::kAligned, entry.dataset_id, id});
        const auto survivors = filter_fake_answers(qa.true_answer, qa.fake_answers, embedder, config.sim_threshold);
        std::size_t s = 0;
        for (std::size_t k = 0; k < qa.fake_answers.size() && s < survivors.size(); ++k) {
          if (qa.fake_answers[k] != survivors[s]) continue;
          built.push_back({qa.passage, qa_to_claim(qa, survivors[s]), Label3::kContradiction, entry.dataset_id,
                           id + "#fake" + std::to_string(k)});
          ++s;
        }
        stats.input += 1 + qa.fake_answers.size();
        stats.dropped_by_similarity += qa.fake_answers.size() - survivors.size();
        for (auto& b : built) candidates.push_back(std::move(b));
        continue;
      }

      const std::string* context = first_string(j, {"context", "premise", "sentence1", "text_a"});
      const std::string* claim = first_string(j, {"claim", "hypothesis", "sentence2", "text_b"});
      if (!context || !claim) throw DataError("record needs context and claim");
      if (is_blank(*claim)) throw DataError("empty claim");
      auto lit = j.find("label");
      if (lit == j.end()) throw DataError("record has no label");
      RawLabel raw;
      if (lit->is_string())
        raw = lit->get<std::string>();
      else if (lit->is_number_integer() && entry.label_scheme != LabelScheme::kRegression)
        raw = std::to_string(lit->get<long long>());  // 0/1 spellings of binary labels
      else if (lit->is_number())
        raw = lit->get<double>();
      else
        throw DataError("label must be a string or a number");
      const Label3 label = unify_label(labels, entry.dataset_id, raw);
      ++stats.input;
      candidates.push_back({*context, *claim, label, entry.dataset_id, id});
    } catch (const Error& ex) {
      malformed(line_no, ex.what());
    } catch (const json::exception& ex) {
      malformed(line_no, ex.what());
    }
  }

  std::vector<UnifiedSample> kept;
  kept.reserve(candidates.size());
  for (auto& s : candidates) {
    if (filter_by_length(s, config.max_context_tokens, config.tokenizer))
      kept.push_back(std::move(s));
    else
      ++stats.dropped_by_length;
  }

  const std::size_t cap = config.cap.value_or(entry.cap);
  const std::size_t before = kept.size();
  kept = cap_dataset(std::move(kept), cap);
  stats.dropped_by_cap += before - kept.size();
  stats.kept += kept.size();
  return kept;
}

// ---------------------------------------------------------------------------
// whole run

PipelineResult run_pipeline(const std::vector<DatasetRegistryEntry>& registry,
                            const std::map<std::string, std::string>& sources, const PipelineConfig& config) {
  config.tokenizer.validate();
  if (config.cap && *config.cap == 0) throw ConfigError("cap must be positive");
  if (config.max_context_tokens == 0) throw ConfigError("max context tokens must be positive");
  if (!(config.sim_threshold > 0.0 && config.sim_threshold <= 1.0))
    throw ConfigError("similarity threshold must be in (0, 1]");
  if (config.out_dir.empty()) throw ConfigError("no output directory");

  struct Job {
    const DatasetRegistryEntry* entry;
    std::string path;
  };
  std::vector<Job> jobs;
  for (const auto& e : registry) {
    if (!e.enabled) continue;
    std::string path;
    if (auto it = sources.find(e.dataset_id); it != sources.end())
      path = it->second;
    else
      path = e.source;
    if (path.empty()) throw DataError("no source for dataset " + e.dataset_id);
    if (!fs::exists(path)) throw DataError("source for " + e.dataset_id + " not found: " + path);
    jobs.push_back({&e, path});
  }

  const auto n = static_cast<std::ptrdiff_t>(jobs.size());
  std::vector<std::vector<UnifiedSample>> outputs(jobs.size());
  std::vector<FilterStats> stats(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());

  const int threads = static_cast<int>(std::max<std::size_t>(1, config.parallelism));
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const std::string text = read_file(jobs[i].path);
      outputs[i] = clean_dataset(*jobs[i].entry, text, config, stats[i]);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  PipelineResult result;
  fs::create_directories(config.out_dir);
  const fs::path out(config.out_dir);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    std::string body;
    for (const auto& s : outputs[i]) {
      body += to_jsonl(s);
      body += '\n';
    }
    const fs::path file = out / (jobs[i].entry->dataset_id + ".jsonl");
    write_file(file, body);
    result.written_files.push_back(file.string());
    result.per_dataset[jobs[i].entry->dataset_id] = stats[i];
    result.total.merge(stats[i]);
  }

  ordered_json sj;
  sj["config_hash"] = config.config_hash;
  ordered_json per = ordered_json::object();
  for (std::size_t i = 0; i < jobs.size(); ++i) per[jobs[i].entry->dataset_id] = stats[i].to_json();
  sj["datasets"] = per;
  sj["total"] = result.total.to_json();
  write_file(out / "stats.json", sj.dump(2) + "\n");
  result.written_files.push_back((out / "stats.json").string());

  TrainingManifest manifest;
  manifest.samples_per_dataset = config.cap.value_or(kDefaultCap);
  manifest.max_context_length = config.max_context_tokens;
  manifest.seed = config.seed;
  write_file(out / "train_manifest.json", render_training_manifest(manifest));
  result.written_files.push_back((out / "train_manifest.json").string());
  return result;
}

}  // namespace limra
