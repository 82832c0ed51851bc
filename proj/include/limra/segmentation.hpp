#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace limra {

enum class TokenizerScheme { kWhitespacePunct, kExternal };

inline constexpr std::size_t kDefaultChunkBudget = 350;

struct TokenizerSpec {
  TokenizerScheme scheme = TokenizerScheme::kWhitespacePunct;
  std::size_t chunk_budget = kDefaultChunkBudget;
  /// Used when scheme == kExternal.
  std::function<std::vector<std::string>(std::string_view)> external;

  /// Throws ConfigError for a zero budget or a missing external tokenizer.
  void validate() const;
};

/// Splits on Unicode whitespace, then peels leading and trailing punctuation
/// off each piece as single-character tokens. Internal punctuation stays
/// ("2,000" is one token).
std::vector<std::string> tokenize(std::string_view text, const TokenizerSpec& spec = {});
std::size_t count_tokens(std::string_view text, const TokenizerSpec& spec = {});

/// Words ending in '.' that never end a sentence ("Dr.", "e.g.", "U.S.").
class AbbreviationList {
 public:
  AbbreviationList() = default;
  /// One abbreviation per line; blank lines and lines starting with '#' are ignored.
  static AbbreviationList from_text(std::string_view text);
  static AbbreviationList from_file(const std::string& path);
  static const AbbreviationList& builtin();

  bool contains(std::string_view word) const;
  std::size_t size() const noexcept { return lowered_.size(); }

 private:
  std::unordered_set<std::string> lowered_;
};

/// Byte range [begin, end) of a sentence within its source text.
struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Rule-based splitter: a run of . ! ? (plus closing quotes/brackets) ends a
/// sentence when followed by end-of-text or whitespace and an uppercase letter,
/// unless the word is a guarded abbreviation or a single-letter initial.
std::vector<SentenceSpan> sentence_spans(std::string_view text,
                                         const AbbreviationList& abbreviations = AbbreviationList::builtin());
std::vector<std::string> split_sentences(std::string_view text,
                                         const AbbreviationList& abbreviations = AbbreviationList::builtin());

struct ChunkedInput {
  std::vector<std::string> chunks;
  std::vector<std::string> sentences;
  std::vector<std::size_t> chunk_token_counts;
};

/// Greedy sentence packing under spec.chunk_budget. A sentence longer than the
/// budget becomes its own chunk; sentences are never split.
ChunkedInput chunk_context_detailed(std::string_view context, const TokenizerSpec& spec = {},
                                    const AbbreviationList& abbreviations = AbbreviationList::builtin());
std::vector<std::string> chunk_context(std::string_view context, const TokenizerSpec& spec = {},
                                       const AbbreviationList& abbreviations = AbbreviationList::builtin());

/// Chunks the context and splits the claim into sentences in one go.
ChunkedInput segment(std::string_view context, std::string_view claim, const TokenizerSpec& spec = {},
                     const AbbreviationList& abbreviations = AbbreviationList::builtin());

namespace text {

/// Decodes one UTF-8 code point at `pos`, returning it and advancing `pos`.
/// Invalid bytes decode as themselves (one byte).
char32_t next_code_point(std::string_view s, std::size_t& pos);
bool is_unicode_space(char32_t cp);
bool is_punctuation(char32_t cp);
std::string to_lower_ascii(std::string_view s);

}  // namespace text

}  // namespace limra
