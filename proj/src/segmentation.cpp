#include "limra/segmentation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "limra/error.hpp"
#include "limra/resources.hpp"

namespace limra {

namespace text {

char32_t next_code_point(std::string_view s, std::size_t& pos) {
  const auto lead = static_cast<unsigned char>(s[pos]);
  std::size_t len = 1;
  char32_t cp = lead;
  if (lead >= 0xF0 && lead < 0xF8) {
    len = 4;
    cp = lead & 0x07;
  } else if (lead >= 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if (lead >= 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  }
  if (len > 1) {
    if (pos + len > s.size()) {
      ++pos;
      return lead;
    }
    for (std::size_t k = 1; k < len; ++k) {
      const auto cont = static_cast<unsigned char>(s[pos + k]);
      if ((cont & 0xC0) != 0x80) {
        ++pos;
        return lead;
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
  }
  pos += len;
  return cp;
}

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_punctuation(char32_t cp) {
  if (cp < 0x80) return std::ispunct(static_cast<int>(cp)) != 0;
  switch (cp) {
    case 0x2018: case 0x2019: case 0x201C: case 0x201D:  // curly quotes
    case 0x2013: case 0x2014: case 0x2026:               // dashes, ellipsis
    case 0xAB: case 0xBB:                                // guillemets
      return true;
    default:
      return false;
  }
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace text

void TokenizerSpec::validate() const {
  if (chunk_budget < 1) throw ConfigError("chunk_budget must be >= 1");
  if (scheme == TokenizerScheme::kExternal && !external) {
    throw ConfigError("external tokenizer scheme selected but no tokenizer supplied");
  }
}

namespace {

// Appends tokens for one whitespace-free piece.
void split_piece(std::string_view piece, std::vector<std::string>& out) {
  // Code point boundaries of the piece.
  std::vector<std::size_t> starts;
  std::vector<bool> punct;
  for (std::size_t pos = 0; pos < piece.size();) {
    starts.push_back(pos);
    punct.push_back(text::is_punctuation(text::next_code_point(piece, pos)));
  }
  starts.push_back(piece.size());
  const std::size_t n = punct.size();

  std::size_t lo = 0;
  while (lo < n && punct[lo]) ++lo;
  std::size_t hi = n;
  while (hi > lo && punct[hi - 1]) --hi;

  for (std::size_t k = 0; k < lo; ++k) out.emplace_back(piece.substr(starts[k], starts[k + 1] - starts[k]));
  if (lo < hi) out.emplace_back(piece.substr(starts[lo], starts[hi] - starts[lo]));
  for (std::size_t k = std::max(hi, lo); k < n; ++k) {
    out.emplace_back(piece.substr(starts[k], starts[k + 1] - starts[k]));
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view input, const TokenizerSpec& spec) {
  if (spec.scheme == TokenizerScheme::kExternal) {
    spec.validate();
    return spec.external(input);
  }
  std::vector<std::string> tokens;
  std::size_t piece_begin = std::string_view::npos;
  for (std::size_t pos = 0; pos < input.size();) {
    const std::size_t at = pos;
    const char32_t cp = text::next_code_point(input, pos);
    if (text::is_unicode_space(cp)) {
      if (piece_begin != std::string_view::npos) {
        split_piece(input.substr(piece_begin, at - piece_begin), tokens);
        piece_begin = std::string_view::npos;
      }
    } else if (piece_begin == std::string_view::npos) {
      piece_begin = at;
    }
  }
  if (piece_begin != std::string_view::npos) split_piece(input.substr(piece_begin), tokens);
  return tokens;
}

std::size_t count_tokens(std::string_view input, const TokenizerSpec& spec) { return tokenize(input, spec).size(); }

AbbreviationList AbbreviationList::from_text(std::string_view content) {
  AbbreviationList list;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t\r");
    list.lowered_.insert(text::to_lower_ascii(line.substr(first, last - first + 1)));
  }
  return list;
}

AbbreviationList AbbreviationList::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open abbreviation list " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

const AbbreviationList& AbbreviationList::builtin() {
  static const AbbreviationList list = from_text(resources::abbreviations());
  return list;
}

bool AbbreviationList::contains(std::string_view word) const {
  return lowered_.count(text::to_lower_ascii(word)) > 0;
}

namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(std::string_view s, std::size_t pos, std::size_t& len) {
  const char c = s[pos];
  if (c == '"' || c == '\'' || c == ')' || c == ']') {
    len = 1;
    return true;
  }
  std::size_t p = pos;
  const char32_t cp = text::next_code_point(s, p);
  if (cp == 0x2019 || cp == 0x201D) {
    len = p - pos;
    return true;
  }
  return false;
}

bool is_opener(char c) { return c == '"' || c == '\'' || c == '(' || c == '['; }

// Start of the whitespace-delimited word containing byte `pos`.
std::size_t word_start(std::string_view s, std::size_t pos) {
  std::size_t b = pos;
  while (b > 0 && !std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return b;
}

bool guarded(std::string_view s, std::size_t term_begin, std::size_t term_end, const AbbreviationList& abbrevs) {
  if (term_end - term_begin != 1 || s[term_begin] != '.') return false;
  std::size_t b = word_start(s, term_begin);
  while (b < term_begin && is_opener(s[b])) ++b;
  std::string_view word = s.substr(b, term_end - b);
  if (abbrevs.contains(word)) return true;
  // Initials: "J. K. Rowling".
  return word.size() == 2 && std::isupper(static_cast<unsigned char>(word[0]));
}

// Skips Unicode whitespace starting at pos.
std::size_t skip_space(std::string_view s, std::size_t pos) {
  while (pos < s.size()) {
    std::size_t next = pos;
    if (!text::is_unicode_space(text::next_code_point(s, next))) break;
    pos = next;
  }
  return pos;
}

void push_trimmed(std::string_view s, std::size_t begin, std::size_t end, std::vector<SentenceSpan>& out) {
  begin = skip_space(s, begin);
  // Trim trailing whitespace by scanning code points forward.
  std::size_t last_non_space = begin;
  for (std::size_t pos = begin; pos < end;) {
    const char32_t cp = text::next_code_point(s, pos);
    if (!text::is_unicode_space(cp)) last_non_space = pos;
  }
  if (last_non_space > begin) out.push_back({begin, last_non_space});
}

}  // namespace

std::vector<SentenceSpan> sentence_spans(std::string_view s, const AbbreviationList& abbreviations) {
  std::vector<SentenceSpan> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_terminator(s[i])) {
      ++i;
      continue;
    }
    const std::size_t term_begin = i;
    while (i < s.size() && is_terminator(s[i])) ++i;
    const std::size_t term_end = i;
    std::size_t len = 0;
    while (i < s.size() && is_closer(s, i, len)) i += len;
    const std::size_t sentence_end = i;

    const std::size_t after_space = skip_space(s, i);
    bool boundary = false;
    if (after_space == s.size()) {
      boundary = true;
    } else if (after_space > i) {
      std::size_t look = after_space;
      while (look < s.size() && is_opener(s[look])) ++look;
      boundary = look < s.size() && std::isupper(static_cast<unsigned char>(s[look]));
    }
    if (boundary && guarded(s, term_begin, term_end, abbreviations)) boundary = false;
    if (boundary) {
      push_trimmed(s, start, sentence_end, out);
      start = after_space;
      i = after_space;
    }
  }
  if (start < s.size()) push_trimmed(s, start, s.size(), out);
  return out;
}

std::vector<std::string> split_sentences(std::string_view s, const AbbreviationList& abbreviations) {
  std::vector<std::string> out;
  for (const auto& span : sentence_spans(s, abbreviations)) out.emplace_back(s.substr(span.begin, span.end - span.begin));
  return out;
}

ChunkedInput chunk_context_detailed(std::string_view context, const TokenizerSpec& spec,
                                    const AbbreviationList& abbreviations) {
  spec.validate();
  ChunkedInput result;
  const auto spans = sentence_spans(context, abbreviations);

  std::size_t chunk_begin = 0;
  std::size_t chunk_end = 0;
  std::size_t chunk_tokens = 0;
  bool open = false;
  auto flush = [&] {
    if (!open) return;
    result.chunks.emplace_back(context.substr(chunk_begin, chunk_end - chunk_begin));
    result.chunk_token_counts.push_back(chunk_tokens);
    open = false;
  };

  for (const auto& span : spans) {
    const std::size_t n = count_tokens(context.substr(span.begin, span.end - span.begin), spec);
    if (open && chunk_tokens + n > spec.chunk_budget) flush();
    if (!open) {
      chunk_begin = span.begin;
      chunk_tokens = 0;
      open = true;
    }
    chunk_end = span.end;
    chunk_tokens += n;
  }
  flush();
  return result;
}

std::vector<std::string> chunk_context(std::string_view context, const TokenizerSpec& spec,
                                       const AbbreviationList& abbreviations) {
  return chunk_context_detailed(context, spec, abbreviations).chunks;
}

ChunkedInput segment(std::string_view context, std::string_view claim, const TokenizerSpec& spec,
                     const AbbreviationList& abbreviations) {
  ChunkedInput result = chunk_context_detailed(context, spec, abbreviations);
  result.sentences = split_sentences(claim, abbreviations);
  return result;
}

}  // namespace limra
