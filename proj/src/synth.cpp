#include "limra/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "http_util.hpp"
#include "limra/hashing.hpp"
#include "limra/numbers.hpp"
#include "limra/resources.hpp"
#include "limra/segmentation.hpp"

namespace limra {

std::string_view to_string(EntityKind kind) noexcept {
  switch (kind) {
    case EntityKind::kPerson: return "PERSON";
    case EntityKind::kOrg: return "ORG";
    case EntityKind::kTime: return "TIME";
    case EntityKind::kQuantity: return "QUANTITY";
    case EntityKind::kDate: return "DATE";
    case EntityKind::kNumberLike: return "NUMBER-LIKE";
  }
  return "PERSON";
}

bool is_name_kind(EntityKind kind) noexcept { return kind == EntityKind::kPerson || kind == EntityKind::kOrg; }

std::string_view to_string(PerturbMode mode) noexcept {
  switch (mode) {
    case PerturbMode::kNameChange: return "NAME-CHANGE";
    case PerturbMode::kNumChange: return "NUM-CHANGE";
    case PerturbMode::kNumRephrase: return "NUM-REPHRASE";
  }
  return "NAME-CHANGE";
}

std::string_view to_string(Polarity polarity) noexcept {
  return polarity == Polarity::kPositive ? "POSITIVE" : "NEGATIVE";
}

Polarity polarity_of(PerturbMode mode) noexcept {
  return mode == PerturbMode::kNumRephrase ? Polarity::kPositive : Polarity::kNegative;
}

// ---------------------------------------------------------------------------
// Entity detection

namespace {

const std::set<std::string, std::less<>>& titles() {
  static const std::set<std::string, std::less<>> s{
      "Mr",        "Mrs",     "Ms",       "Dr",        "Prof",     "Professor", "Doctor",  "Sir",
      "Dame",      "Lord",    "Lady",     "King",      "Queen",    "Prince",    "Princess", "Duke",
      "Duchess",   "Archduke", "Archduchess", "Emperor", "Empress", "President", "Senator", "General",
      "Captain",   "Pope",    "Saint",    "St",        "Count",    "Countess",  "Baron",   "Baroness",
      "Emir",      "Sultan",  "Tsar",     "Czar",      "Mayor",    "Governor",  "Judge",   "Bishop",
      "Cardinal",  "Father",  "Sister",   "Brother",   "Chancellor", "Minister", "Colonel", "Lieutenant",
      "Sergeant",  "Admiral", "Rev",      "Reverend"};
  return s;
}

const std::set<std::string, std::less<>>& function_words() {
  static const std::set<std::string, std::less<>> s{
      "The",  "A",     "An",    "This",   "That",   "These",  "Those", "In",     "On",     "At",
      "By",   "For",   "From",  "With",   "Of",     "And",    "But",   "Or",     "As",     "It",
      "He",   "She",   "They",  "We",     "I",      "His",    "Her",   "Their",  "Our",    "Its",
      "When", "While", "After", "Before", "During", "If",     "Since", "Although", "Though", "To",
      "Is",   "Was",   "Are",   "Were",   "Then",   "There",  "Here",  "However", "Also",  "Both"};
  return s;
}

const std::set<std::string, std::less<>>& org_suffixes() {
  static const std::set<std::string, std::less<>> s{
      "Inc",        "Corp",       "Corporation", "Company",  "Co",         "Ltd",     "LLC",
      "University", "College",    "Institute",   "Association", "Society", "Foundation", "Bank",
      "Group",      "Agency",     "Council",     "Committee", "Party",     "Club",    "Department",
      "Ministry",   "Organization", "Organisation", "Museum", "School",   "Hospital", "Airlines",
      "Records",    "Studios",    "Press",       "Times",    "Union",      "League",  "Federation"};
  return s;
}

const std::set<std::string, std::less<>>& time_units() {
  static const std::set<std::string, std::less<>> s{
      "year",  "years",  "yr",     "yrs",     "month",   "months",  "week",     "weeks",  "day",
      "days",  "hour",   "hours",  "hr",      "hrs",     "minute",  "minutes",  "min",    "mins",
      "second", "seconds", "sec",  "secs",    "decade",  "decades", "century",  "centuries"};
  return s;
}

const std::set<std::string, std::less<>>& quantity_units() {
  static const std::set<std::string, std::less<>> s{
      "ft",      "feet",    "foot",     "meter",   "meters",  "metre",   "metres", "m",       "km",
      "kilometers", "kilometres", "mile", "miles",  "kg",      "kilograms", "pounds", "lb",   "lbs",
      "ton",     "tons",    "tonnes",   "inch",    "inches",  "cm",      "mm",     "percent", "people",
      "persons", "dollars", "euros",    "points",  "goals",   "games",   "times",  "acres",   "degrees",
      "episodes", "songs",  "albums",   "members", "students", "votes",  "copies", "runs",    "seats"};
  return s;
}

bool is_edge_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

struct Word {
  std::size_t begin = 0;       // whole whitespace-delimited word
  std::size_t end = 0;
  std::size_t core_begin = 0;  // without edge punctuation
  std::size_t core_end = 0;
};

std::vector<Word> words_of(std::string_view s) {
  std::vector<Word> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t b = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (b == i) break;
    Word w{b, i, b, i};
    while (w.core_begin < w.core_end && is_edge_punct(s[w.core_begin])) ++w.core_begin;
    while (w.core_end > w.core_begin && is_edge_punct(s[w.core_end - 1])) --w.core_end;
    if (w.core_end - w.core_begin > 2 && s.substr(w.core_end - 2, 2) == "'s") w.core_end -= 2;
    out.push_back(w);
  }
  return out;
}

bool capitalized_word(std::string_view core) {
  if (core.empty() || !std::isupper(static_cast<unsigned char>(core.front()))) return false;
  return std::none_of(core.begin(), core.end(), [](unsigned char c) { return std::isdigit(c); });
}

void detect_names(std::string_view claim, std::vector<EntitySpan>& out) {
  const auto words = words_of(claim);
  std::size_t k = 0;
  while (k < words.size()) {
    auto core = [&](std::size_t idx) {
      return claim.substr(words[idx].core_begin, words[idx].core_end - words[idx].core_begin);
    };
    if (!capitalized_word(core(k))) {
      ++k;
      continue;
    }
    std::size_t last = k;
    // A run continues while the previous word has no trailing punctuation.
    while (last + 1 < words.size() && words[last].core_end == words[last].end && capitalized_word(core(last + 1)) &&
           words[last + 1].core_begin == words[last + 1].begin) {
      ++last;
    }
    std::size_t first = k;
    while (first <= last && (titles().count(core(first)) > 0 || function_words().count(core(first)) > 0)) ++first;
    if (first < last) {
      EntitySpan span;
      span.start = words[first].core_begin;
      span.end = words[last].core_end;
      span.surface = std::string(claim.substr(span.start, span.end - span.start));
      span.kind = org_suffixes().count(core(last)) > 0 ? EntityKind::kOrg : EntityKind::kPerson;
      out.push_back(std::move(span));
    }
    k = last + 1;
  }
}

void detect_numbers(std::string_view claim, std::vector<EntitySpan>& out) {
  static const std::regex clock(R"(\b\d{1,2}:\d{2}(\s?(am|pm|a\.m\.|p\.m\.))?)", std::regex::icase);
  const std::string owned(claim);
  for (auto it = std::sregex_iterator(owned.begin(), owned.end(), clock); it != std::sregex_iterator(); ++it) {
    EntitySpan span;
    span.start = static_cast<std::size_t>(it->position());
    span.end = span.start + static_cast<std::size_t>(it->length());
    span.surface = it->str();
    span.kind = EntityKind::kTime;
    out.push_back(std::move(span));
  }

  auto parsed = numbers::parse(claim);
  if (!parsed) return;
  const auto words = words_of(claim);
  for (const auto& atom : parsed->atoms) {
    EntitySpan span;
    span.start = atom.begin;
    span.end = atom.end;
    span.kind = atom.kind == numbers::NumberAtom::Kind::kDate ? EntityKind::kDate : EntityKind::kNumberLike;
    if (span.kind == EntityKind::kNumberLike) {
      if (span.end < claim.size() && claim[span.end] == '%') {
        ++span.end;
        span.kind = EntityKind::kQuantity;
      } else {
        auto next = std::find_if(words.begin(), words.end(), [&](const Word& w) { return w.begin >= span.end; });
        const bool adjacent = next != words.end() && next->core_begin == next->begin &&
                              claim.substr(span.end, next->begin - span.end).find_first_not_of(" \t") ==
                                  std::string_view::npos;
        if (adjacent) {
          const std::string unit = text::to_lower_ascii(claim.substr(next->core_begin, next->core_end - next->core_begin));
          if (time_units().count(unit) > 0) {
            span.kind = EntityKind::kTime;
            span.end = next->core_end;
          } else if (quantity_units().count(unit) > 0) {
            span.kind = EntityKind::kQuantity;
            span.end = next->core_end;
          }
        }
      }
    }
    span.surface = std::string(claim.substr(span.start, span.end - span.start));
    out.push_back(std::move(span));
  }
}

}  // namespace

std::vector<EntitySpan> RuleEntityDetector::detect(std::string_view claim) const {
  std::vector<EntitySpan> out;
  detect_names(claim, out);
  detect_numbers(claim, out);
  return out;
}

std::vector<EntitySpan> detect_entities(std::string_view claim, const EntityDetector& detector) {
  std::vector<EntitySpan> candidates = detector.detect(claim);
  std::erase_if(candidates, [&](const EntitySpan& s) {
    return s.start >= s.end || s.end > claim.size() || claim.substr(s.start, s.end - s.start) != s.surface;
  });
  std::stable_sort(candidates.begin(), candidates.end(), [](const EntitySpan& a, const EntitySpan& b) {
    const auto la = a.end - a.start;
    const auto lb = b.end - b.start;
    return la != lb ? la > lb : a.start < b.start;
  });
  std::vector<EntitySpan> chosen;
  for (auto& c : candidates) {
    const bool overlaps = std::any_of(chosen.begin(), chosen.end(),
                                      [&](const EntitySpan& s) { return c.start < s.end && s.start < c.end; });
    if (!overlaps) chosen.push_back(std::move(c));
  }
  std::sort(chosen.begin(), chosen.end(), [](const EntitySpan& a, const EntitySpan& b) { return a.start < b.start; });
  return chosen;
}

// ---------------------------------------------------------------------------
// Prompts and LLM access

PromptLibrary PromptLibrary::builtin() {
  PromptLibrary lib;
  lib.name_change_ = std::string(resources::prompt_name_change());
  lib.num_change_ = std::string(resources::prompt_num_change());
  lib.num_rephrase_ = std::string(resources::prompt_num_rephrase());
  return lib;
}

PromptLibrary PromptLibrary::from_directory(const std::string& dir) {
  auto read = [&](const std::string& name) {
    std::ifstream in(dir + "/" + name);
    if (!in) throw ConfigError("cannot open prompt template " + dir + "/" + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  PromptLibrary lib;
  lib.name_change_ = read("name_change.txt");
  lib.num_change_ = read("num_change.txt");
  lib.num_rephrase_ = read("num_rephrase.txt");
  return lib;
}

const std::string& PromptLibrary::template_for(PerturbMode mode) const {
  switch (mode) {
    case PerturbMode::kNameChange: return name_change_;
    case PerturbMode::kNumChange: return num_change_;
    case PerturbMode::kNumRephrase: return num_rephrase_;
  }
  return name_change_;
}

std::string PromptLibrary::render(PerturbMode mode, std::string_view original) const {
  std::string prompt = template_for(mode);
  const std::string marker = "{original}";
  const auto at = prompt.rfind(marker);
  if (at == std::string::npos) throw ConfigError("prompt template lacks the {original} marker");
  prompt.replace(at, marker.size(), original);
  // Completion starts right after "Changed Text:".
  while (!prompt.empty() && (prompt.back() == '\n' || prompt.back() == '\r')) prompt.pop_back();
  return prompt;
}

HttpLlmClient::HttpLlmClient(LlmConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw ConfigError("LLM client needs an endpoint");
  std::tie(base_, path_) = detail::split_url(config_.endpoint);
}

std::string HttpLlmClient::complete(const std::string& prompt) {
  ordered_json request;
  request["prompt"] = prompt;
  request["max_tokens"] = config_.max_tokens;
  request["temperature"] = 0.0;
  auto result =
      detail::post_json_with_retry(base_, path_, request.dump(), config_.timeout, config_.retries, config_.backoff);
  if (result.status != 200) throw RemoteRejectedError(result.status, result.body);
  json response = json::parse(result.body, nullptr, false);
  if (response.is_discarded() || !response.contains("text") || !response["text"].is_string()) {
    throw BackendError("completion response lacks a string 'text' field");
  }
  return response["text"].get<std::string>();
}

json AuditEntry::to_json() const {
  ordered_json j;
  j["audit_id"] = audit_id;
  j["source_id"] = source_sample_id;
  j["mode"] = std::string(to_string(mode));
  j["surface"] = surface;
  j["backend"] = backend;
  j["prompt"] = prompt;
  j["completions"] = completions;
  j["outcome"] = outcome;
  return json::parse(j.dump());
}

namespace {

std::string first_line_trimmed(std::string_view completion) {
  const auto nl = completion.find('\n');
  std::string_view line = completion.substr(0, nl);
  const auto b = line.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = line.find_last_not_of(" \t\r");
  return std::string(line.substr(b, e - b + 1));
}

}  // namespace

std::optional<std::string> perturb_entity(std::string_view surface, PerturbMode mode, LlmClient& llm,
                                          const PromptLibrary& prompts, AuditEntry* audit) {
  const std::string prompt = prompts.render(mode, surface);
  if (audit) {
    audit->backend = "llm";
    audit->prompt = prompt;
  }
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string completion = llm.complete(prompt);
    if (audit) audit->completions.push_back(completion);
    std::string line = first_line_trimmed(completion);
    if (!line.empty()) {
      if (audit) audit->outcome = "ok";
      return line;
    }
  }
  if (audit) audit->outcome = "empty";
  return std::nullopt;
}

std::optional<std::string> LlmPerturber::perturb(std::string_view surface, PerturbMode mode, AuditEntry& audit) {
  return perturb_entity(surface, mode, llm_, prompts_, &audit);
}

// ---------------------------------------------------------------------------
// Stub perturber

namespace {

char shift_letter(char c) {
  static constexpr std::string_view vowels = "aeiou";
  static constexpr std::string_view consonants = "bcdfghjklmnpqrstvwxyz";
  const bool upper = std::isupper(static_cast<unsigned char>(c)) != 0;
  const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  char next = lower;
  if (auto v = vowels.find(lower); v != std::string_view::npos) {
    next = vowels[(v + 1) % vowels.size()];
  } else if (auto k = consonants.find(lower); k != std::string_view::npos) {
    next = consonants[(k + 1) % consonants.size()];
  }
  return upper ? static_cast<char>(std::toupper(static_cast<unsigned char>(next))) : next;
}

std::string match_case(std::string replacement, std::string_view original) {
  if (!original.empty() && std::isupper(static_cast<unsigned char>(original.front())) && !replacement.empty()) {
    replacement.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement.front())));
  }
  return replacement;
}

bool is_whole(double v) { return std::abs(v - std::round(v)) < 1e-9 && std::abs(v) < 9e15; }

std::string format_decimal_like(double v, std::string_view original) {
  const auto dot = original.find('.');
  const int places = dot == std::string_view::npos ? 0 : static_cast<int>(original.size() - dot - 1);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", places, v);
  return buf;
}

std::string render_date(const numbers::NumberAtom& a, bool month_first) {
  std::string out;
  const std::string month(numbers::month_name(a.month));
  if (a.day == 0) {
    out = month;
    if (a.year) out += " " + std::to_string(a.year);
    return out;
  }
  if (month_first) {
    out = month + " " + std::to_string(a.day);
    if (a.year) out += ", " + std::to_string(a.year);
  } else {
    out = std::to_string(a.day) + " " + month;
    if (a.year) out += " " + std::to_string(a.year);
  }
  return out;
}

std::string replace_range(std::string_view s, std::size_t b, std::size_t e, std::string_view with) {
  std::string out(s.substr(0, b));
  out += with;
  out += s.substr(e);
  return out;
}

}  // namespace

std::optional<std::string> stub_name_change(std::string_view surface) {
  std::string out(surface);
  // Middle letter of the last word that has letters.
  std::size_t end = out.size();
  while (end > 0) {
    std::size_t b = out.find_last_of(' ', end - 1);
    b = b == std::string::npos ? 0 : b + 1;
    std::vector<std::size_t> letters;
    for (std::size_t i = b; i < end; ++i) {
      if (std::isalpha(static_cast<unsigned char>(out[i]))) letters.push_back(i);
    }
    if (!letters.empty()) {
      const std::size_t at = letters[letters.size() / 2];
      out[at] = shift_letter(out[at]);
      return out;
    }
    if (b == 0) break;
    end = b - 1;
  }
  return std::nullopt;
}

std::optional<std::string> stub_num_change(std::string_view surface) {
  auto parsed = numbers::parse(surface);
  if (!parsed) return std::nullopt;
  const auto& a = parsed->atoms.front();
  const std::string_view original = surface.substr(a.begin, a.end - a.begin);
  std::string with;
  if (a.kind == numbers::NumberAtom::Kind::kDate) {
    numbers::NumberAtom changed = a;
    if (changed.day) {
      changed.day = changed.day % 28 + 1;
    } else if (changed.year) {
      changed.year += 1;
    } else {
      changed.month = changed.month % 12 + 1;
    }
    with = render_date(changed, std::isalpha(static_cast<unsigned char>(original.front())) != 0);
  } else if (a.from_digits) {
    const double v = a.value + 1;
    if (a.ordinal) {
      with = numbers::ordinal_digits(static_cast<std::int64_t>(v));
    } else if (is_whole(a.value)) {
      with = numbers::format_integer(static_cast<std::int64_t>(v), a.digit_grouping);
    } else {
      with = format_decimal_like(v, original);
    }
  } else {
    if (!is_whole(a.value) || a.value + 1 > 1e6) return std::nullopt;
    const auto v = static_cast<std::int64_t>(a.value) + 1;
    with = match_case(a.ordinal ? numbers::ordinal_words(v) : numbers::cardinal_words(v), original);
  }
  return replace_range(surface, a.begin, a.end, with);
}

std::optional<std::string> stub_num_rephrase(std::string_view surface) {
  auto parsed = numbers::parse(surface);
  if (!parsed) return std::nullopt;
  const auto& a = parsed->atoms.front();
  const std::string_view original = surface.substr(a.begin, a.end - a.begin);
  std::string with;
  if (a.kind == numbers::NumberAtom::Kind::kDate) {
    const bool month_first = std::isalpha(static_cast<unsigned char>(original.front())) != 0;
    if (a.day == 0) {
      if (!a.year || a.year > 1000000) return std::nullopt;
      with = std::string(numbers::month_name(a.month)) + " " +
             (a.from_digits ? numbers::cardinal_words(a.year) : std::to_string(a.year));
    } else {
      with = render_date(a, !month_first);
    }
  } else if (a.from_digits) {
    if (!is_whole(a.value) || a.value > 1e6 || a.value < 0) return std::nullopt;
    const auto v = static_cast<std::int64_t>(a.value);
    with = a.ordinal ? numbers::ordinal_words(v) : numbers::cardinal_words(v);
  } else {
    if (!is_whole(a.value)) return std::nullopt;
    const auto v = static_cast<std::int64_t>(a.value);
    with = a.ordinal ? numbers::ordinal_digits(v) : numbers::format_integer(v, false);
  }
  return replace_range(surface, a.begin, a.end, with);
}

std::optional<std::string> StubPerturber::perturb(std::string_view surface, PerturbMode mode, AuditEntry& audit) {
  audit.backend = "stub";
  std::optional<std::string> out;
  switch (mode) {
    case PerturbMode::kNameChange: out = stub_name_change(surface); break;
    case PerturbMode::kNumChange: out = stub_num_change(surface); break;
    case PerturbMode::kNumRephrase: out = stub_num_rephrase(surface); break;
  }
  if (out) audit.completions.push_back(*out);
  audit.outcome = out ? "ok" : "empty";
  return out;
}

// ---------------------------------------------------------------------------
// Verification

namespace {

std::string normalize_name(std::string_view s) {
  std::string out;
  bool space = false;
  for (unsigned char c : s) {
    if (std::ispunct(c)) continue;
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace

bool verify_perturbation(std::string_view original, std::string_view replacement, PerturbMode mode) {
  if (is_blank(replacement)) return false;
  switch (mode) {
    case PerturbMode::kNameChange: {
      const auto r = normalize_name(replacement);
      return !r.empty() && r != normalize_name(original);
    }
    case PerturbMode::kNumChange: {
      auto po = numbers::parse(original);
      auto pr = numbers::parse(replacement);
      if (po && pr) return !po->same_value(*pr);
      return numbers::normalize_surface(original) != numbers::normalize_surface(replacement);
    }
    case PerturbMode::kNumRephrase: {
      auto po = numbers::parse(original);
      auto pr = numbers::parse(replacement);
      return po && pr && po->same_value(*pr) &&
             numbers::normalize_surface(original) != numbers::normalize_surface(replacement);
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Assembly

json PerturbationRecord::to_json() const {
  ordered_json j;
  j["source_id"] = source_sample_id;
  j["start"] = span.start;
  j["end"] = span.end;
  j["surface"] = span.surface;
  j["kind"] = std::string(to_string(span.kind));
  j["mode"] = std::string(to_string(mode));
  j["replacement"] = replacement;
  j["polarity"] = std::string(to_string(polarity));
  j["verified"] = verified;
  j["audit_id"] = audit_id;
  return json::parse(j.dump());
}

std::string_view dataset_id_for(RobustKind kind) noexcept {
  return kind == RobustKind::kName ? "robust_name" : "robust_num";
}

std::string splice(std::string_view claim, const EntitySpan& span, std::string_view replacement) {
  return replace_range(claim, span.start, span.end, replacement);
}

std::vector<UnifiedSample> assemble_dataset(std::span<const UnifiedSample> source,
                                            std::span<const PerturbationRecord> records, RobustKind kind,
                                            AssemblyStats* stats) {
  AssemblyStats local;
  AssemblyStats& st = stats ? *stats : local;
  const std::string dataset(dataset_id_for(kind));

  std::map<std::string_view, std::vector<const PerturbationRecord*>> by_source;
  for (const auto& r : records) by_source[r.source_sample_id].push_back(&r);

  std::vector<UnifiedSample> out;
  std::set<std::string_view> seen_sources;
  for (const auto& sample : source) {
    auto it = by_source.find(sample.sample_id);
    if (it == by_source.end()) continue;
    seen_sources.insert(sample.sample_id);
    if (sample.label != Label3::kAligned) {
      st.skipped_source_label += it->second.size();
      continue;
    }
    std::vector<UnifiedSample> emitted;
    std::size_t k = 0;
    for (const PerturbationRecord* r : it->second) {
      if (!r->verified) {
        ++st.skipped_unverified;
        continue;
      }
      const auto& span = r->span;
      if (span.end > sample.claim.size() || span.start > span.end ||
          std::string_view(sample.claim).substr(span.start, span.end - span.start) != span.surface) {
        ++st.dropped_drift;
        continue;
      }
      UnifiedSample s;
      s.dataset_id = dataset;
      s.sample_id = sample.sample_id + "#" + std::to_string(k++);
      s.context = sample.context;
      s.claim = splice(sample.claim, span, r->replacement);
      s.label = r->polarity == Polarity::kNegative ? Label3::kContradiction : Label3::kAligned;
      emitted.push_back(std::move(s));
    }
    if (emitted.empty()) continue;
    UnifiedSample original = sample;
    original.dataset_id = dataset;
    original.label = Label3::kAligned;
    out.push_back(std::move(original));
    ++st.originals;
    for (auto& s : emitted) out.push_back(std::move(s));
    st.emitted += emitted.size();
  }
  for (const auto& [id, recs] : by_source) {
    if (!seen_sources.count(id)) st.dropped_drift += recs.size();
  }
  return out;
}

json SynthStats::to_json() const {
  ordered_json j;
  j["sources"] = sources;
  j["skipped_source_label"] = skipped_source_label;
  j["detector_failures"] = detector_failures;
  j["spans"] = spans;
  j["perturb_failures"] = perturb_failures;
  j["unverified"] = unverified;
  j["emitted_perturbations"] = assembly.emitted;
  j["emitted_originals"] = assembly.originals;
  j["dropped_drift"] = assembly.dropped_drift;
  return json::parse(j.dump());
}

SynthOutput generate_robustness(std::span<const UnifiedSample> source, const SynthConfig& config,
                                const EntityDetector& detector, Perturber& perturber) {
  if (config.in_flight < 1) throw ConfigError("in-flight limit must be >= 1");
  if (!(config.train_fraction >= 0.0 && config.train_fraction <= 1.0)) {
    throw ConfigError("train fraction must be in [0,1]");
  }
  SynthOutput out;
  out.stats.sources = source.size();

  struct Job {
    std::size_t sample = 0;
    EntitySpan span;
    PerturbMode mode = PerturbMode::kNameChange;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const auto& sample = source[i];
    if (sample.label != Label3::kAligned) {
      ++out.stats.skipped_source_label;
      continue;
    }
    std::vector<EntitySpan> spans;
    try {
      spans = detect_entities(sample.claim, detector);
    } catch (const std::exception&) {
      ++out.stats.detector_failures;
      continue;
    }
    std::size_t ordinal = 0;
    for (auto& span : spans) {
      const bool wanted = config.kind == RobustKind::kName ? is_name_kind(span.kind) : !is_name_kind(span.kind);
      if (!wanted) continue;
      Job job{i, std::move(span), PerturbMode::kNameChange};
      if (config.kind == RobustKind::kNum) {
        const auto bits = splitmix64(config.seed ^ fnv1a64(sample.sample_id) ^ splitmix64(ordinal));
        job.mode = (bits & 1) ? PerturbMode::kNumChange : PerturbMode::kNumRephrase;
      }
      ++ordinal;
      jobs.push_back(std::move(job));
    }
  }
  out.stats.spans = jobs.size();

  std::vector<std::optional<std::string>> replies(jobs.size());
  out.audit.resize(jobs.size());
  const auto n = static_cast<std::ptrdiff_t>(jobs.size());
  const int threads = perturber.concurrent() ? static_cast<int>(config.in_flight) : 1;
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const Job& job = jobs[j];
    AuditEntry& audit = out.audit[j];
    audit.audit_id = "a" + std::to_string(j);
    audit.source_sample_id = source[job.sample].sample_id;
    audit.mode = job.mode;
    audit.surface = job.span.surface;
    try {
      replies[j] = perturber.perturb(job.span.surface, job.mode, audit);
    } catch (const std::exception& e) {
      audit.outcome = std::string("error: ") + e.what();
    }
  }

  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!replies[j]) {
      ++out.stats.perturb_failures;
      continue;
    }
    PerturbationRecord r;
    r.source_sample_id = source[jobs[j].sample].sample_id;
    r.span = jobs[j].span;
    r.mode = jobs[j].mode;
    r.replacement = *replies[j];
    r.polarity = polarity_of(r.mode);
    r.verified = verify_perturbation(r.span.surface, r.replacement, r.mode);
    r.audit_id = out.audit[j].audit_id;
    if (!r.verified) ++out.stats.unverified;
    out.records.push_back(std::move(r));
  }

  out.samples = assemble_dataset(source, out.records, config.kind, &out.stats.assembly);
  // assemble_dataset emits each original followed by its perturbations.
  std::string group;
  bool to_train = true;
  for (const auto& s : out.samples) {
    if (group.empty() || s.sample_id.rfind(group + "#", 0) != 0) {
      group = s.sample_id;
      to_train = unit_interval(splitmix64(config.seed ^ fnv1a64(group))) < config.train_fraction;
    }
    (to_train ? out.train : out.test).push_back(s);
  }
  return out;
}

}  // namespace limra
