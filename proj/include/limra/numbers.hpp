#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace limra::numbers {

/// One numeric expression found in a text: a scalar ("2,000", "twenty-five",
/// "2nd") or a simple date ("22 June 1990", "June twenty-two nineteen ninety").
struct NumberAtom {
  enum class Kind { kScalar, kDate };

  Kind kind = Kind::kScalar;
  double value = 0.0;
  bool ordinal = false;
  int year = 0;   // 0 when absent
  int month = 0;  // 1..12, 0 when absent
  int day = 0;    // 0 when absent

  std::size_t begin = 0;  // byte range in the parsed text
  std::size_t end = 0;
  bool from_digits = false;   // written with digits rather than words
  bool digit_grouping = false;  // "2,000"

  /// Value equality; ignores spelling and position.
  bool same_value(const NumberAtom& other) const;
};

struct ParsedNumber {
  std::vector<NumberAtom> atoms;
  /// Lowercased non-number words in order, with "#" where each atom sits.
  std::vector<std::string> residual;

  bool same_value(const ParsedNumber& other) const;
};

/// Parses digits (with grouping and decimals), cardinal and ordinal words up
/// to 10^6, and simple dates. Returns nullopt when no number is present.
std::optional<ParsedNumber> parse(std::string_view text);

/// Lowercased, whitespace-collapsed, trailing sentence punctuation removed.
std::string normalize_surface(std::string_view text);

/// "one hundred fifty-four", "two thousand", "twenty-five". 0 <= n <= 10^6.
std::string cardinal_words(std::int64_t n);
/// "first", "twenty-second", "one hundredth".
std::string ordinal_words(std::int64_t n);
/// "1st", "22nd", "113th".
std::string ordinal_digits(std::int64_t n);
/// Integer with optional thousands separators ("2,000").
std::string format_integer(std::int64_t n, bool grouping);

std::string_view month_name(int month);

}  // namespace limra::numbers
