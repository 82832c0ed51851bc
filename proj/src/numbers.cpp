#include "limra/numbers.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <regex>

namespace limra::numbers {

namespace {

constexpr std::array<std::string_view, 20> kUnits = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen"};
constexpr std::array<std::string_view, 10> kTens = {"",      "",      "twenty",  "thirty", "forty",
                                                    "fifty", "sixty", "seventy", "eighty", "ninety"};
constexpr std::array<std::string_view, 20> kUnitOrdinals = {
    "zeroth",     "first",      "second",      "third",       "fourth",     "fifth",     "sixth",
    "seventh",    "eighth",     "ninth",       "tenth",       "eleventh",   "twelfth",   "thirteenth",
    "fourteenth", "fifteenth",  "sixteenth",   "seventeenth", "eighteenth", "nineteenth"};
constexpr std::array<std::string_view, 10> kTensOrdinals = {"",         "",          "twentieth", "thirtieth",
                                                            "fortieth", "fiftieth",  "sixtieth",  "seventieth",
                                                            "eightieth", "ninetieth"};
constexpr std::array<std::string_view, 12> kMonths = {"january", "february", "march",     "april",
                                                      "may",     "june",     "july",      "august",
                                                      "september", "october", "november", "december"};
constexpr std::array<std::string_view, 12> kMonthTitles = {"January", "February", "March",     "April",
                                                           "May",     "June",     "July",      "August",
                                                           "September", "October", "November", "December"};

enum class PieceType { kUnit, kTeen, kTens, kHundred, kScale, kDigits, kAnd };

struct Piece {
  PieceType type = PieceType::kUnit;
  double value = 0.0;
  bool ordinal = false;
  bool grouping = false;
};

enum class TokenKind { kPiece, kMonth, kWord };

struct Token {
  TokenKind kind = TokenKind::kWord;
  Piece piece;
  int month = 0;
  std::string text;  // lowercased, edge punctuation removed
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<Piece> word_piece(const std::string& w) {
  for (std::size_t i = 0; i < kUnits.size(); ++i) {
    if (w == kUnits[i]) return Piece{i < 10 ? PieceType::kUnit : PieceType::kTeen, static_cast<double>(i), false};
    if (i > 0 && w == kUnitOrdinals[i]) {
      return Piece{i < 10 ? PieceType::kUnit : PieceType::kTeen, static_cast<double>(i), true};
    }
  }
  for (std::size_t i = 2; i < kTens.size(); ++i) {
    if (w == kTens[i]) return Piece{PieceType::kTens, static_cast<double>(i * 10), false};
    if (w == kTensOrdinals[i]) return Piece{PieceType::kTens, static_cast<double>(i * 10), true};
  }
  if (w == "hundred") return Piece{PieceType::kHundred, 100, false};
  if (w == "hundredth") return Piece{PieceType::kHundred, 100, true};
  if (w == "thousand") return Piece{PieceType::kScale, 1e3, false};
  if (w == "thousandth") return Piece{PieceType::kScale, 1e3, true};
  if (w == "million") return Piece{PieceType::kScale, 1e6, false};
  if (w == "millionth") return Piece{PieceType::kScale, 1e6, true};
  return std::nullopt;
}

std::optional<Piece> digit_piece(const std::string& w) {
  static const std::regex plain(R"(^\d+(\.\d+)?$)");
  static const std::regex grouped(R"(^\d{1,3}(,\d{3})+(\.\d+)?$)");
  static const std::regex ordinal(R"(^(\d+)(st|nd|rd|th)$)");
  std::smatch m;
  if (std::regex_match(w, plain)) return Piece{PieceType::kDigits, std::stod(w), false, false};
  if (std::regex_match(w, grouped)) {
    std::string digits;
    for (char c : w) {
      if (c != ',') digits.push_back(c);
    }
    return Piece{PieceType::kDigits, std::stod(digits), false, true};
  }
  if (std::regex_match(w, m, ordinal)) return Piece{PieceType::kDigits, std::stod(m[1].str()), true, false};
  return std::nullopt;
}

int month_of(const std::string& w) {
  for (std::size_t i = 0; i < kMonths.size(); ++i) {
    if (w == kMonths[i]) return static_cast<int>(i) + 1;
  }
  static const std::map<std::string, int> abbreviations{{"jan", 1}, {"feb", 2},  {"mar", 3},  {"apr", 4},
                                                         {"jun", 6}, {"jul", 7},  {"aug", 8},  {"sep", 9},
                                                         {"sept", 9}, {"oct", 10}, {"nov", 11}, {"dec", 12}};
  auto it = abbreviations.find(w);
  return it == abbreviations.end() ? 0 : it->second;
}

bool edge_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) && c != '%'; }

// Splits into whitespace words, strips edge punctuation, expands hyphenated
// number words ("twenty-five") into their parts.
std::vector<Token> lex(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t b = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t e = i;
    while (b < e && edge_punct(text[b])) ++b;
    while (e > b && edge_punct(text[e - 1])) --e;
    if (b == e) continue;

    bool percent = false;
    if (text[e - 1] == '%') {
      percent = true;
      --e;
      while (e > b && edge_punct(text[e - 1])) --e;
    }

    std::string w = lower(text.substr(b, e - b));
    auto push_word = [&](std::string word, std::size_t wb, std::size_t we) {
      Token t;
      t.text = std::move(word);
      t.begin = wb;
      t.end = we;
      if (auto p = digit_piece(t.text)) {
        t.kind = TokenKind::kPiece;
        t.piece = *p;
      } else if (auto q = word_piece(t.text)) {
        t.kind = TokenKind::kPiece;
        t.piece = *q;
      } else if (int m = month_of(t.text)) {
        t.kind = TokenKind::kMonth;
        t.month = m;
      } else if (t.text == "and") {
        t.kind = TokenKind::kPiece;
        t.piece = Piece{PieceType::kAnd, 0, false};
      }
      tokens.push_back(std::move(t));
    };

    if (!w.empty() && w.find('-') != std::string::npos) {
      // Only expand when every part is a number word.
      std::vector<std::pair<std::size_t, std::size_t>> parts;
      std::size_t start = 0;
      bool all_numeric = true;
      while (start <= w.size()) {
        std::size_t dash = w.find('-', start);
        if (dash == std::string::npos) dash = w.size();
        if (dash == start || !word_piece(w.substr(start, dash - start))) all_numeric = false;
        parts.emplace_back(start, dash);
        start = dash + 1;
      }
      if (all_numeric) {
        for (auto [pb, pe] : parts) push_word(w.substr(pb, pe - pb), b + pb, b + pe);
      } else {
        push_word(w, b, e);
      }
    } else {
      push_word(w, b, e);
    }
    if (percent) {
      Token t;
      t.text = "percent";
      t.begin = e;
      t.end = e + 1;
      tokens.push_back(std::move(t));
    }
  }
  // "and" is a connector only between a hundred/scale word and a number.
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    auto& t = tokens[k];
    if (t.kind != TokenKind::kPiece || t.piece.type != PieceType::kAnd) continue;
    const bool prev_ok = k > 0 && tokens[k - 1].kind == TokenKind::kPiece &&
                         (tokens[k - 1].piece.type == PieceType::kHundred ||
                          tokens[k - 1].piece.type == PieceType::kScale) &&
                         !tokens[k - 1].piece.ordinal;
    const bool next_ok = k + 1 < tokens.size() && tokens[k + 1].kind == TokenKind::kPiece &&
                         tokens[k + 1].piece.type != PieceType::kAnd;
    if (!(prev_ok && next_ok)) t.kind = TokenKind::kWord;
  }
  return tokens;
}

struct Group {
  double total = 0.0;
  double current = 0.0;
  double last_scale = 0.0;
  PieceType last = PieceType::kAnd;
  bool ordinal = false;
  bool words = false;
  bool digits = false;
  bool grouping = false;
  std::size_t first_token = 0;
  std::size_t last_token = 0;

  double value() const { return total + current; }
};

bool extends(const Group& g, const Piece& p) {
  if (g.ordinal) return false;
  switch (p.type) {
    case PieceType::kUnit:
      return g.last == PieceType::kTens || g.last == PieceType::kHundred || g.last == PieceType::kScale ||
             g.last == PieceType::kAnd;
    case PieceType::kTeen:
    case PieceType::kTens:
      return g.last == PieceType::kHundred || g.last == PieceType::kScale || g.last == PieceType::kAnd;
    case PieceType::kHundred:
      return g.last != PieceType::kHundred && g.last != PieceType::kScale && g.last != PieceType::kAnd &&
             g.current > 0 && g.current < 100;
    case PieceType::kScale:
      return g.last != PieceType::kScale && g.last != PieceType::kAnd && g.current > 0 &&
             (g.last_scale == 0 || p.value < g.last_scale);
    case PieceType::kDigits:
      if (g.last == PieceType::kAnd) return true;
      if (g.last == PieceType::kScale) return p.value < g.last_scale;
      return false;
    case PieceType::kAnd:
      return true;
  }
  return false;
}

void apply(Group& g, const Piece& p) {
  switch (p.type) {
    case PieceType::kHundred:
      g.current *= 100;
      break;
    case PieceType::kScale:
      g.total += g.current * p.value;
      g.current = 0;
      g.last_scale = p.value;
      break;
    case PieceType::kAnd:
      break;
    default:
      g.current += p.value;
      break;
  }
  if (p.type == PieceType::kDigits) {
    g.digits = true;
    g.grouping = g.grouping || p.grouping;
  } else if (p.type != PieceType::kAnd) {
    g.words = true;
  }
  g.ordinal = p.ordinal;
  g.last = p.type;
}

Group start_group(const Piece& p, std::size_t token) {
  Group g;
  g.first_token = token;
  g.last_token = token;
  if (p.type == PieceType::kHundred || p.type == PieceType::kScale) {
    // Bare "hundred"/"thousand" reads as one of them.
    g.current = 1;
    g.last = PieceType::kUnit;
  }
  apply(g, p);
  return g;
}

// An atom or a standalone token in the parsed sequence.
struct Item {
  enum class Kind { kAtom, kMonth, kWord } kind = Kind::kWord;
  Group group;
  std::size_t token = 0;  // month/word token index
};

bool is_day(const Group& g) {
  const double v = g.value();
  return v >= 1 && v <= 31 && v == std::floor(v);
}

bool word_pair_year(const Group& a, const Group& b) {
  return a.words && !a.digits && b.words && !b.digits && !a.ordinal && !b.ordinal && a.value() >= 10 &&
         a.value() <= 99 && b.value() >= 0 && b.value() <= 99;
}

}  // namespace

bool NumberAtom::same_value(const NumberAtom& other) const {
  if (kind != other.kind) return false;
  if (kind == Kind::kDate) return year == other.year && month == other.month && day == other.day;
  return value == other.value && ordinal == other.ordinal;
}

bool ParsedNumber::same_value(const ParsedNumber& other) const {
  if (atoms.size() != other.atoms.size() || residual != other.residual) return false;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!atoms[i].same_value(other.atoms[i])) return false;
  }
  return true;
}

std::optional<ParsedNumber> parse(std::string_view text) {
  const std::vector<Token> tokens = lex(text);

  // Group consecutive number pieces into cardinal expressions.
  std::vector<Item> items;
  std::optional<Group> open;
  auto close = [&] {
    if (open) {
      Item item;
      item.kind = Item::Kind::kAtom;
      item.group = *open;
      items.push_back(item);
      open.reset();
    }
  };
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const Token& t = tokens[k];
    if (t.kind == TokenKind::kPiece) {
      if (open && extends(*open, t.piece)) {
        apply(*open, t.piece);
        open->last_token = k;
      } else {
        close();
        open = start_group(t.piece, k);
      }
      continue;
    }
    close();
    Item item;
    item.kind = t.kind == TokenKind::kMonth ? Item::Kind::kMonth : Item::Kind::kWord;
    item.token = k;
    items.push_back(item);
  }
  close();

  ParsedNumber out;
  auto scalar_atom = [&](const Group& g) {
    NumberAtom a;
    a.kind = NumberAtom::Kind::kScalar;
    a.value = g.value();
    a.ordinal = g.ordinal;
    a.begin = tokens[g.first_token].begin;
    a.end = tokens[g.last_token].end;
    a.from_digits = g.digits && !g.words;
    a.digit_grouping = g.grouping;
    return a;
  };
  auto is_atom = [&](std::size_t i) { return i < items.size() && items[i].kind == Item::Kind::kAtom; };
  auto is_month = [&](std::size_t i) { return i < items.size() && items[i].kind == Item::Kind::kMonth; };
  auto is_of = [&](std::size_t i) {
    return i < items.size() && items[i].kind == Item::Kind::kWord && tokens[items[i].token].text == "of";
  };

  // Reads a year starting at item i: one atom, or two spoken two-digit groups.
  auto read_year = [&](std::size_t i, int& year, std::size_t& consumed) {
    if (!is_atom(i) || items[i].group.ordinal) return false;
    if (is_atom(i + 1) && word_pair_year(items[i].group, items[i + 1].group)) {
      year = static_cast<int>(items[i].group.value() * 100 + items[i + 1].group.value());
      consumed = 2;
      return true;
    }
    const double v = items[i].group.value();
    if (v != std::floor(v) || v < 1) return false;
    year = static_cast<int>(v);
    consumed = 1;
    return true;
  };

  for (std::size_t i = 0; i < items.size();) {
    const Item& item = items[i];
    if (item.kind == Item::Kind::kWord) {
      out.residual.push_back(tokens[item.token].text);
      ++i;
      continue;
    }
    NumberAtom date;
    date.kind = NumberAtom::Kind::kDate;
    std::size_t next = i;
    bool matched = false;

    if (item.kind == Item::Kind::kAtom && is_day(item.group)) {
      // 22 June [1990] / 22nd of June [1990]
      std::size_t m = i + 1;
      if (is_of(m)) ++m;
      if (is_month(m)) {
        date.day = static_cast<int>(item.group.value());
        date.month = tokens[items[m].token].month;
        date.begin = tokens[item.group.first_token].begin;
        date.end = tokens[items[m].token].end;
        next = m + 1;
        int year = 0;
        std::size_t used = 0;
        if (read_year(next, year, used)) {
          date.year = year;
          date.end = tokens[items[next + used - 1].group.last_token].end;
          next += used;
        }
        date.from_digits = item.group.digits && !item.group.words;
        matched = true;
      }
    } else if (item.kind == Item::Kind::kMonth) {
      // June 22[, 1990] / June [twenty-two] [nineteen ninety] / June 1990
      date.month = tokens[item.token].month;
      date.begin = tokens[item.token].begin;
      date.end = tokens[item.token].end;
      next = i + 1;
      if (is_atom(next)) {
        const Group& g = items[next].group;
        int year = 0;
        std::size_t used = 0;
        if (is_day(g) && !(is_atom(next + 1) && word_pair_year(g, items[next + 1].group) && !is_atom(next + 2))) {
          date.day = static_cast<int>(g.value());
          date.end = tokens[g.last_token].end;
          date.from_digits = g.digits && !g.words;
          ++next;
          if (read_year(next, year, used)) {
            date.year = year;
            date.end = tokens[items[next + used - 1].group.last_token].end;
            next += used;
          }
          matched = true;
        } else if (read_year(next, year, used) && year > 31) {
          date.year = year;
          date.end = tokens[items[next + used - 1].group.last_token].end;
          date.from_digits = g.digits && !g.words;
          next += used;
          matched = true;
        }
      }
    }

    if (matched) {
      out.atoms.push_back(date);
      out.residual.emplace_back("#");
      i = next;
    } else if (item.kind == Item::Kind::kMonth) {
      out.residual.push_back(tokens[item.token].text);
      ++i;
    } else {
      out.atoms.push_back(scalar_atom(item.group));
      out.residual.emplace_back("#");
      ++i;
    }
  }
  if (out.atoms.empty()) return std::nullopt;
  return out;
}

std::string normalize_surface(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  while (!out.empty() && (out.back() == '.' || out.back() == ',' || out.back() == ';' || out.back() == ':' ||
                          out.back() == '!' || out.back() == '?')) {
    out.pop_back();
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

namespace {

std::string below_thousand(std::int64_t n) {
  std::string out;
  if (n >= 100) {
    out = std::string(kUnits[n / 100]) + " hundred";
    n %= 100;
    if (n == 0) return out;
    out += ' ';
  }
  if (n < 20) return out + std::string(kUnits[n]);
  out += kTens[n / 10];
  if (n % 10) out += "-" + std::string(kUnits[n % 10]);
  return out;
}

}  // namespace

std::string cardinal_words(std::int64_t n) {
  if (n < 0 || n > 1000000) throw std::out_of_range("cardinal_words supports 0..10^6");
  if (n == 0) return "zero";
  if (n == 1000000) return "one million";
  std::string out;
  if (n >= 1000) {
    out = below_thousand(n / 1000) + " thousand";
    n %= 1000;
    if (n == 0) return out;
    out += ' ';
  }
  return out + below_thousand(n);
}

std::string ordinal_words(std::int64_t n) {
  std::string words = cardinal_words(n);
  // Replace the final word (after the last space or hyphen) with its ordinal.
  const std::size_t cut = words.find_last_of(" -");
  const std::string head = cut == std::string::npos ? "" : words.substr(0, cut + 1);
  const std::string last = cut == std::string::npos ? words : words.substr(cut + 1);
  for (std::size_t i = 0; i < kUnits.size(); ++i) {
    if (last == kUnits[i]) return head + std::string(kUnitOrdinals[i]);
  }
  for (std::size_t i = 2; i < kTens.size(); ++i) {
    if (last == kTens[i]) return head + std::string(kTensOrdinals[i]);
  }
  return head + last + "th";  // hundred, thousand, million
}

std::string ordinal_digits(std::int64_t n) {
  const std::int64_t mod100 = n % 100;
  const char* suffix = "th";
  if (mod100 < 11 || mod100 > 13) {
    switch (n % 10) {
      case 1: suffix = "st"; break;
      case 2: suffix = "nd"; break;
      case 3: suffix = "rd"; break;
      default: break;
    }
  }
  return std::to_string(n) + suffix;
}

std::string format_integer(std::int64_t n, bool grouping) {
  std::string digits = std::to_string(n < 0 ? -n : n);
  if (grouping) {
    for (int pos = static_cast<int>(digits.size()) - 3; pos > 0; pos -= 3) digits.insert(pos, ",");
  }
  return n < 0 ? "-" + digits : digits;
}

std::string_view month_name(int month) {
  if (month < 1 || month > 12) return {};
  return kMonthTitles[month - 1];
}

}  // namespace limra::numbers
