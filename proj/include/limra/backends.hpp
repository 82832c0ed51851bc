#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "limra/alignment.hpp"
#include "limra/segmentation.hpp"

namespace limra {

enum class BackendKind { kLexical, kFixture, kRemote };

std::string_view to_string(BackendKind kind) noexcept;
BackendKind parse_backend_kind(std::string_view text);

struct AlignRequest {
  std::string_view sample_id;
  std::span<const std::string> chunks;
  std::span<const std::string> sentences;
};

struct BackendIdentity {
  std::string kind;
  std::string model;
  std::string version;
};

/// An alignment function: scores every (claim sentence, context chunk) pair.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;
  virtual AlignmentMatrix align(const AlignRequest& request) = 0;
  /// Whether align() may be called from several threads at once.
  virtual bool concurrent() const noexcept = 0;
  virtual BackendIdentity identity() const = 0;
};

// ---------------------------------------------------------------------------
// Lexical oracle

/// Per-text token statistics consumed by the lexical cell formula.
struct LexicalBag {
  std::map<std::string, std::size_t> counts;  // lowercased content tokens
  std::size_t total = 0;
};

/// Entity/number tokens of one claim sentence, lowercased, one entry per occurrence.
struct SentenceProfile {
  LexicalBag bag;
  std::vector<std::string> entity_tokens;
};

LexicalBag make_bag(std::string_view text);
/// Builds profiles for all claim sentences together, since the sentence-initial
/// capitalization rule looks at the other sentences of the claim.
std::vector<SentenceProfile> profile_sentences(std::span<const std::string> sentences);

/// 2 * overlap / (|a| + |b|) over token multisets; 1 when both are empty.
double token_f1(const LexicalBag& sentence, const LexicalBag& chunk);
ProbTriple lexical_cell(const SentenceProfile& sentence, const LexicalBag& chunk);

/// Deterministic token-overlap stand-in for a trained alignment model.
/// The grid is filled in parallel; lexical_align_serial is the reference.
AlignmentMatrix lexical_align(std::span<const std::string> chunks, std::span<const std::string> sentences);
AlignmentMatrix lexical_align_serial(std::span<const std::string> chunks, std::span<const std::string> sentences);

class LexicalBackend final : public ScorerBackend {
 public:
  AlignmentMatrix align(const AlignRequest& request) override;
  bool concurrent() const noexcept override { return true; }
  BackendIdentity identity() const override { return {"lexical", "lexical-f1", "1"}; }
};

// ---------------------------------------------------------------------------
// Fixture replay

/// Replays recorded matrices keyed by sample id. File format:
/// {"model": str, "version": str, "alignments": {"<key>": probs, ...}}
class FixtureBackend final : public ScorerBackend {
 public:
  FixtureBackend(std::map<std::string, AlignmentMatrix, std::less<>> matrices, std::string model = "fixture",
                 std::string version = "1");
  static FixtureBackend from_json(const json& document);
  static FixtureBackend from_file(const std::string& path);

  AlignmentMatrix align(const AlignRequest& request) override;
  bool concurrent() const noexcept override { return true; }
  BackendIdentity identity() const override { return {"fixture", model_, version_}; }
  std::size_t size() const noexcept { return matrices_.size(); }

 private:
  std::map<std::string, AlignmentMatrix, std::less<>> matrices_;
  std::string model_;
  std::string version_;
};

// ---------------------------------------------------------------------------
// Remote sidecar client

inline constexpr std::string_view kAlignPath = "/v1/align";
inline constexpr std::string_view kProtocolVersion = "v1";

struct RemoteConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  std::chrono::milliseconds timeout{30000};
  int retries = 3;
  std::chrono::milliseconds backoff{200};
  std::size_t pool_size = 4;
};

std::string make_align_request_body(std::span<const std::string> chunks, std::span<const std::string> sentences);
/// Validates a /v1/align response body against the requested shape.
AlignmentMatrix parse_align_response(const json& response, std::size_t sentences, std::size_t chunks);

class RemoteBackend final : public ScorerBackend {
 public:
  explicit RemoteBackend(RemoteConfig config);
  ~RemoteBackend() override;

  AlignmentMatrix align(const AlignRequest& request) override;
  bool concurrent() const noexcept override { return true; }
  BackendIdentity identity() const override;

  /// Number of HTTP attempts issued so far (including retries).
  std::size_t attempts() const noexcept;

 private:
  class Pool;
  RemoteConfig config_;
  std::unique_ptr<Pool> pool_;
  mutable std::mutex identity_mutex_;
  std::string model_ = "unknown";
  std::string version_ = "unknown";
};

// ---------------------------------------------------------------------------

struct BackendConfig {
  BackendKind kind = BackendKind::kLexical;
  std::string fixture_path;
  RemoteConfig remote;
};

std::unique_ptr<ScorerBackend> make_backend(const BackendConfig& config);

}  // namespace limra
