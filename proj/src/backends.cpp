#include "limra/backends.hpp"

#include <atomic>
#include <cctype>
#include <fstream>
#include <set>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace limra {

std::string_view to_string(BackendKind kind) noexcept {
  switch (kind) {
    case BackendKind::kLexical: return "lexical";
    case BackendKind::kFixture: return "fixture";
    case BackendKind::kRemote: return "remote";
  }
  return "lexical";
}

BackendKind parse_backend_kind(std::string_view text) {
  if (text == "lexical") return BackendKind::kLexical;
  if (text == "fixture") return BackendKind::kFixture;
  if (text == "remote") return BackendKind::kRemote;
  throw ConfigError("unknown backend '" + std::string(text) + "' (expected lexical|fixture|remote)");
}

// ---------------------------------------------------------------------------
// Lexical oracle

namespace {

bool is_content_token(std::string_view token) {
  std::size_t pos = 0;
  const char32_t cp = text::next_code_point(token, pos);
  return !(pos == token.size() && text::is_punctuation(cp));
}

bool has_digit(std::string_view token) {
  for (unsigned char c : token) {
    if (std::isdigit(c)) return true;
  }
  return false;
}

bool is_capitalized(std::string_view token) {
  return !token.empty() && std::isupper(static_cast<unsigned char>(token.front()));
}

std::vector<std::string> content_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& t : tokenize(s)) {
    if (is_content_token(t)) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

LexicalBag make_bag(std::string_view s) {
  LexicalBag bag;
  for (const auto& t : content_tokens(s)) {
    ++bag.counts[text::to_lower_ascii(t)];
    ++bag.total;
  }
  return bag;
}

std::vector<SentenceProfile> profile_sentences(std::span<const std::string> sentences) {
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(sentences.size());
  std::set<std::string, std::less<>> mid_sentence_caps;
  for (const auto& sentence : sentences) {
    tokens.push_back(content_tokens(sentence));
    const auto& ts = tokens.back();
    for (std::size_t k = 1; k < ts.size(); ++k) {
      if (is_capitalized(ts[k])) mid_sentence_caps.insert(ts[k]);
    }
  }

  std::vector<SentenceProfile> out(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto& profile = out[i];
    const auto& ts = tokens[i];
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const std::string& t = ts[k];
      ++profile.bag.counts[text::to_lower_ascii(t)];
      ++profile.bag.total;
      bool entity = has_digit(t);
      if (!entity && is_capitalized(t)) entity = k > 0 || mid_sentence_caps.count(t) > 0;
      if (entity) profile.entity_tokens.push_back(text::to_lower_ascii(t));
    }
  }
  return out;
}

double token_f1(const LexicalBag& sentence, const LexicalBag& chunk) {
  if (sentence.total == 0 && chunk.total == 0) return 1.0;
  if (sentence.total == 0 || chunk.total == 0) return 0.0;
  std::size_t overlap = 0;
  for (const auto& [token, count] : sentence.counts) {
    auto it = chunk.counts.find(token);
    if (it != chunk.counts.end()) overlap += std::min(count, it->second);
  }
  return 2.0 * static_cast<double>(overlap) / static_cast<double>(sentence.total + chunk.total);
}

ProbTriple lexical_cell(const SentenceProfile& sentence, const LexicalBag& chunk) {
  const double aligned = token_f1(sentence.bag, chunk);
  const double rest = 1.0 - aligned;
  double conflict_ratio = 0.0;
  if (!sentence.entity_tokens.empty()) {
    std::size_t absent = 0;
    for (const auto& t : sentence.entity_tokens) {
      if (chunk.counts.find(t) == chunk.counts.end()) ++absent;
    }
    conflict_ratio = static_cast<double>(absent) / static_cast<double>(sentence.entity_tokens.size());
  }
  const double contradiction = rest * conflict_ratio;
  return {aligned, rest - contradiction, contradiction};
}

namespace {

void check_non_empty(std::span<const std::string> chunks, std::span<const std::string> sentences) {
  if (chunks.empty() || sentences.empty()) {
    throw DegenerateInputError("lexical alignment needs at least one chunk and one sentence");
  }
}

}  // namespace

AlignmentMatrix lexical_align(std::span<const std::string> chunks, std::span<const std::string> sentences) {
  check_non_empty(chunks, sentences);
  const auto profiles = profile_sentences(sentences);
  const auto n_chunks = static_cast<std::ptrdiff_t>(chunks.size());
  const auto n_sentences = static_cast<std::ptrdiff_t>(sentences.size());

  std::vector<LexicalBag> bags(chunks.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < n_chunks; ++c) bags[c] = make_bag(chunks[c]);

  std::vector<ProbTriple> cells(sentences.size() * chunks.size());
#pragma omp parallel for collapse(2) schedule(static)
  for (std::ptrdiff_t i = 0; i < n_sentences; ++i) {
    for (std::ptrdiff_t c = 0; c < n_chunks; ++c) {
      cells[i * n_chunks + c] = lexical_cell(profiles[i], bags[c]);
    }
  }
  return AlignmentMatrix(sentences.size(), chunks.size(), std::move(cells));
}

AlignmentMatrix lexical_align_serial(std::span<const std::string> chunks, std::span<const std::string> sentences) {
  check_non_empty(chunks, sentences);
  const auto profiles = profile_sentences(sentences);
  std::vector<LexicalBag> bags;
  bags.reserve(chunks.size());
  for (const auto& chunk : chunks) bags.push_back(make_bag(chunk));

  std::vector<ProbTriple> cells;
  cells.reserve(sentences.size() * chunks.size());
  for (const auto& profile : profiles) {
    for (const auto& bag : bags) cells.push_back(lexical_cell(profile, bag));
  }
  return AlignmentMatrix(sentences.size(), chunks.size(), std::move(cells));
}

AlignmentMatrix LexicalBackend::align(const AlignRequest& request) {
  return lexical_align(request.chunks, request.sentences);
}

// ---------------------------------------------------------------------------
// Fixture replay

FixtureBackend::FixtureBackend(std::map<std::string, AlignmentMatrix, std::less<>> matrices, std::string model,
                               std::string version)
    : matrices_(std::move(matrices)), model_(std::move(model)), version_(std::move(version)) {}

FixtureBackend FixtureBackend::from_json(const json& document) {
  if (!document.is_object() || !document.contains("alignments") || !document.at("alignments").is_object()) {
    throw DataError("fixture document needs an 'alignments' object");
  }
  std::map<std::string, AlignmentMatrix, std::less<>> matrices;
  for (const auto& [key, probs] : document.at("alignments").items()) {
    try {
      matrices.emplace(key, AlignmentMatrix::from_json(probs));
    } catch (const InvariantError& e) {
      throw InvariantError("fixture entry '" + key + "': " + e.what());
    } catch (const ShapeError& e) {
      throw ShapeError("fixture entry '" + key + "': " + std::string(e.what()));
    }
  }
  return FixtureBackend(std::move(matrices), document.value("model", std::string("fixture")),
                        document.value("version", std::string("1")));
}

FixtureBackend FixtureBackend::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open fixture file " + path);
  json document = json::parse(in, nullptr, false);
  if (document.is_discarded()) throw DataError("fixture file " + path + " is not valid JSON");
  return from_json(document);
}

AlignmentMatrix FixtureBackend::align(const AlignRequest& request) {
  auto it = matrices_.find(request.sample_id);
  if (it == matrices_.end()) throw FixtureLookupError(std::string(request.sample_id));
  return it->second;
}

// ---------------------------------------------------------------------------
// Remote sidecar client

std::string make_align_request_body(std::span<const std::string> chunks, std::span<const std::string> sentences) {
  ordered_json body;
  body["chunks"] = std::vector<std::string>(chunks.begin(), chunks.end());
  body["sentences"] = std::vector<std::string>(sentences.begin(), sentences.end());
  return body.dump();
}

AlignmentMatrix parse_align_response(const json& response, std::size_t sentences, std::size_t chunks) {
  if (!response.is_object() || !response.contains("probs")) throw ShapeError("response has no 'probs' field");
  const json& probs = response.at("probs");
  if (!probs.is_array()) throw ShapeError("'probs' is not an array");
  const std::size_t actual_s = probs.size();
  const std::size_t actual_c = (actual_s > 0 && probs.front().is_array()) ? probs.front().size() : 0;
  if (actual_s != sentences || actual_c != chunks) throw ShapeError(sentences, chunks, actual_s, actual_c);
  return AlignmentMatrix::from_json(probs);
}

class RemoteBackend::Pool {
 public:
  Pool(const RemoteConfig& config)
      : config_(config), slots_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config.pool_size))) {}

  template <typename Fn>
  auto with_client(Fn&& fn) {
    slots_.acquire();
    std::unique_ptr<httplib::Client> client;
    {
      std::lock_guard lock(mutex_);
      if (!idle_.empty()) {
        client = std::move(idle_.back());
        idle_.pop_back();
      }
    }
    if (!client) client = make_client();
    struct Return {
      Pool& pool;
      std::unique_ptr<httplib::Client>& client;
      ~Return() {
        {
          std::lock_guard lock(pool.mutex_);
          pool.idle_.push_back(std::move(client));
        }
        pool.slots_.release();
      }
    } give_back{*this, client};
    return fn(*client);
  }

  std::atomic<std::size_t> attempts{0};

 private:
  std::unique_ptr<httplib::Client> make_client() const {
    auto client = std::make_unique<httplib::Client>(config_.endpoint);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client->set_connection_timeout(secs.count(), usecs.count());
    client->set_read_timeout(secs.count(), usecs.count());
    client->set_write_timeout(secs.count(), usecs.count());
    client->set_keep_alive(true);
    return client;
  }

  RemoteConfig config_;
  std::counting_semaphore<> slots_;
  std::mutex mutex_;
  std::vector<std::unique_ptr<httplib::Client>> idle_;
};

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ConfigError("remote backend needs an endpoint");
  if (config_.retries < 0) throw ConfigError("retries must be >= 0");
  pool_ = std::make_unique<Pool>(config_);
}

RemoteBackend::~RemoteBackend() = default;

std::size_t RemoteBackend::attempts() const noexcept { return pool_->attempts.load(); }

BackendIdentity RemoteBackend::identity() const {
  std::lock_guard lock(identity_mutex_);
  return {"remote", model_, version_};
}

AlignmentMatrix RemoteBackend::align(const AlignRequest& request) {
  const std::string body = make_align_request_body(request.chunks, request.sentences);
  const int max_attempts = config_.retries + 1;
  std::string last_failure;

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.backoff * (1 << (attempt - 1)));
    ++pool_->attempts;

    auto result = pool_->with_client([&](httplib::Client& client) {
      return client.Post(std::string(kAlignPath), body, "application/json");
    });
    if (!result) {
      last_failure = "transport failure contacting " + config_.endpoint + ": " + httplib::to_string(result.error());
      spdlog::debug("align attempt {} failed: {}", attempt + 1, last_failure);
      continue;
    }
    const int status = result->status;
    if (status >= 500) {
      last_failure = "server error " + std::to_string(status) + " from " + config_.endpoint;
      spdlog::debug("align attempt {} failed: {}", attempt + 1, last_failure);
      continue;
    }
    if (status != 200) throw RemoteRejectedError(status, result->body);

    json response = json::parse(result->body, nullptr, false);
    if (response.is_discarded()) throw ShapeError("response body is not valid JSON");
    AlignmentMatrix matrix = parse_align_response(response, request.sentences.size(), request.chunks.size());
    {
      std::lock_guard lock(identity_mutex_);
      if (response.contains("model") && response["model"].is_string()) model_ = response["model"];
      if (response.contains("version") && response["version"].is_string()) version_ = response["version"];
    }
    return matrix;
  }
  throw TransportError(last_failure, max_attempts);
}

// ---------------------------------------------------------------------------

std::unique_ptr<ScorerBackend> make_backend(const BackendConfig& config) {
  switch (config.kind) {
    case BackendKind::kLexical:
      return std::make_unique<LexicalBackend>();
    case BackendKind::kFixture:
      if (config.fixture_path.empty()) throw ConfigError("fixture backend needs a fixture path");
      return std::make_unique<FixtureBackend>(FixtureBackend::from_file(config.fixture_path));
    case BackendKind::kRemote:
      return std::make_unique<RemoteBackend>(config.remote);
  }
  throw ConfigError("unknown backend kind");
}

}  // namespace limra
