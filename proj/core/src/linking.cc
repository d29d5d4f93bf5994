#include "structsql/linking.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <regex>
#include <set>

#include "structsql/error.h"
#include "structsql/text.h"

namespace structsql {
namespace {

bool is_punct_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) && c != '_';
}

bool all_punct(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_punct_char);
}

const std::set<std::string, std::less<>>& stop_words() {
  static const std::set<std::string, std::less<>> kWords = {
      "a",     "an",   "the",   "of",    "in",   "on",    "at",   "to",   "for",   "by",
      "with",  "and",  "or",    "is",    "are",  "was",   "were", "be",   "what",  "which",
      "who",   "whom", "whose", "how",   "many", "much",  "show", "list", "give",  "find",
      "all",   "each", "every", "me",    "that", "this",  "these", "those", "from", "as",
      "do",    "doe",  "did",   "have",  "ha",   "there", "their", "it",   "its",   "than",
      "more",  "less", "most",  "least", "id",   "thi",  "has",  "return", "tell"};
  return kWords;
}

bool all_stop_words(const std::vector<std::string>& gram) {
  return std::all_of(gram.begin(), gram.end(),
                     [](const std::string& w) { return w.empty() || stop_words().count(w) > 0; });
}

bool contains_run(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

struct Candidate {
  SchemaItem item;
  std::vector<std::string> tokens;
};

std::vector<Candidate> schema_candidates(const DatabaseSchema& schema) {
  std::vector<Candidate> out;
  for (int t = 0; t < static_cast<int>(schema.table_count()); ++t) {
    const auto& table = schema.table(t);
    out.push_back({SchemaItem::of_table(t), normalize_name(table.display_name.value_or(table.name))});
  }
  for (auto ref : schema.all_columns()) {
    const auto& col = schema.column(ref);
    out.push_back({SchemaItem::of_column(ref), normalize_name(col.display_name.value_or(col.name))});
  }
  return out;
}

bool overlaps(std::size_t s1, std::size_t e1, std::size_t s2, std::size_t e2) {
  return s1 < e2 && s2 < e1;
}

// Accepted spans keyed by (turn, target, value); longer spans are accepted
// first, so a later overlapping span for the same key is always shorter.
class SpanRegistry {
 public:
  bool try_accept(std::size_t turn, const SchemaItem& item, const std::string& value, std::size_t s,
                  std::size_t e) {
    auto& spans = accepted_[{turn, item, value}];
    for (auto [a, b] : spans)
      if (overlaps(a, b, s, e)) return false;
    spans.emplace_back(s, e);
    return true;
  }

 private:
  std::map<std::tuple<std::size_t, SchemaItem, std::string>, std::vector<std::pair<std::size_t, std::size_t>>>
      accepted_;
};

int month_from_name(std::string_view word) {
  static const std::array<const char*, 12> kMonths = {"january", "february", "march",     "april",
                                                      "may",     "june",     "july",      "august",
                                                      "september", "october", "november", "december"};
  std::string w = text::to_lower(word);
  if (w.size() < 3) return 0;
  for (int m = 0; m < 12; ++m) {
    std::string_view full = kMonths[m];
    if (full.substr(0, w.size()) == w) return m + 1;
    if (w == "sept" && m == 8) return 9;
  }
  return 0;
}

bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::string strip_ordinal(std::string s) {
  static const std::array<const char*, 4> kSuffixes = {"st", "nd", "rd", "th"};
  std::string lower = text::to_lower(s);
  for (const char* suf : kSuffixes) {
    std::string_view sv = suf;
    if (lower.size() > sv.size() && lower.ends_with(sv) && is_digits(lower.substr(0, lower.size() - sv.size())))
      return s.substr(0, s.size() - sv.size());
  }
  return s;
}

bool valid_date(int y, int m, int d) {
  if (y < 1 || m < 1 || m > 12 || d < 1) return false;
  static const std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  int limit = kDays[m - 1] + (m == 2 && leap ? 1 : 0);
  return d <= limit;
}

std::optional<std::string> format_date(int y, int m, int d) {
  if (!valid_date(y, m, d)) return std::nullopt;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return std::string(buf);
}

}  // namespace

QuestionTokens QuestionTokens::from_text(const std::vector<std::string>& turns, Language language) {
  QuestionTokens q;
  q.language = language;
  for (const auto& t : turns) {
    auto toks = tokenize_question(t, language);
    if (toks.empty()) throw MalformedDocument("question turn is empty after tokenization");
    q.turns.push_back(std::move(toks));
  }
  return q;
}

std::vector<std::string> tokenize_question(std::string_view input, Language language) {
  std::vector<std::string> out;
  for (const auto& chunk : text::split_whitespace(input)) {
    // CJK code points become their own tokens; surrounding ASCII stays grouped.
    std::vector<std::string> pieces;
    std::string cur;
    for (const auto& cp : text::utf8_codepoints(chunk)) {
      bool split_cp = cp.size() > 1 && (language == Language::Chinese || text::is_cjk(cp));
      if (split_cp) {
        if (!cur.empty()) pieces.push_back(std::move(cur)), cur.clear();
        pieces.push_back(cp);
      } else {
        cur += cp;
      }
    }
    if (!cur.empty()) pieces.push_back(std::move(cur));

    for (const auto& piece : pieces) {
      std::size_t b = 0, e = piece.size();
      while (b < e && is_punct_char(piece[b])) ++b;
      while (e > b && is_punct_char(piece[e - 1])) --e;
      for (std::size_t i = 0; i < b; ++i) out.emplace_back(1, piece[i]);
      if (e > b) out.push_back(piece.substr(b, e - b));
      for (std::size_t i = std::max(e, b); i < piece.size(); ++i) out.emplace_back(1, piece[i]);
    }
  }
  return out;
}

std::string_view match_kind_name(MatchKind kind) {
  switch (kind) {
    case MatchKind::ExactMatch: return "Exact-Match";
    case MatchKind::PartialMatch: return "Partial-Match";
    case MatchKind::ValueMatch: return "Value-Match";
  }
  return "Exact-Match";
}

std::string normalize_word(std::string_view word) {
  std::string w = text::to_lower(word);
  while (!w.empty() && is_punct_char(w.back())) w.pop_back();
  while (!w.empty() && is_punct_char(w.front())) w.erase(w.begin());
  if (w.size() > 3 && w.back() == 's' && w[w.size() - 2] != 's') w.pop_back();
  return w;
}

std::vector<std::string> normalize_name(std::string_view name) {
  std::string spaced(name);
  std::replace(spaced.begin(), spaced.end(), '_', ' ');
  std::vector<std::string> out;
  for (const auto& tok : tokenize_question(spaced, Language::English)) {
    auto w = normalize_word(tok);
    if (!w.empty()) out.push_back(std::move(w));
  }
  return out;
}

std::vector<LinkAnnotation> name_link(const QuestionTokens& question, const DatabaseSchema& schema,
                                      std::size_t max_ngram) {
  if (max_ngram == 0) max_ngram = 1;
  const auto candidates = schema_candidates(schema);
  std::vector<LinkAnnotation> out;
  SpanRegistry registry;
  for (std::size_t turn = 0; turn < question.turns.size(); ++turn) {
    std::vector<std::string> norm;
    for (const auto& tok : question.turns[turn]) norm.push_back(normalize_word(tok));
    const std::size_t len = norm.size();
    for (std::size_t n = std::min(max_ngram, len); n >= 1; --n) {
      for (std::size_t s = 0; s + n <= len; ++s) {
        std::vector<std::string> gram(norm.begin() + static_cast<std::ptrdiff_t>(s),
                                      norm.begin() + static_cast<std::ptrdiff_t>(s + n));
        if (std::any_of(gram.begin(), gram.end(), [](const std::string& w) { return w.empty(); })) continue;
        for (const auto& cand : candidates) {
          MatchKind kind;
          if (gram == cand.tokens) {
            kind = MatchKind::ExactMatch;
          } else if (gram.size() < cand.tokens.size() && !all_stop_words(gram) &&
                     contains_run(cand.tokens, gram)) {
            kind = MatchKind::PartialMatch;
          } else {
            continue;
          }
          if (registry.try_accept(turn, cand.item, {}, s, s + n))
            out.push_back({turn, s, s + n, cand.item, kind, std::nullopt});
        }
      }
    }
  }
  return out;
}

std::vector<LinkAnnotation> value_link(const QuestionTokens& question, const DatabaseSchema& schema,
                                       std::size_t max_ngram) {
  struct ValueEntry {
    ColumnRef column;
    ColumnType type;
    std::string raw;
    std::string normalized;
  };
  std::vector<ValueEntry> values;
  for (auto ref : schema.all_columns()) {
    const auto& col = schema.column(ref);
    if (!col.sample_values) continue;
    for (const auto& v : *col.sample_values) {
      auto norm = normalize_value(v, col.type).text;
      if (!norm.empty()) values.push_back({ref, col.type, v, std::move(norm)});
    }
  }
  std::vector<LinkAnnotation> out;
  if (values.empty()) return out;
  if (max_ngram == 0) max_ngram = 1;

  SpanRegistry registry;
  for (std::size_t turn = 0; turn < question.turns.size(); ++turn) {
    const auto& toks = question.turns[turn];
    for (std::size_t n = std::min(max_ngram, toks.size()); n >= 1; --n) {
      for (std::size_t s = 0; s + n <= toks.size(); ++s) {
        if (all_punct(toks[s]) || all_punct(toks[s + n - 1])) continue;
        std::vector<std::string> gram(toks.begin() + static_cast<std::ptrdiff_t>(s),
                                      toks.begin() + static_cast<std::ptrdiff_t>(s + n));
        std::string joined = text::join(gram, " ");
        std::map<ColumnType, std::string> by_type;
        for (const auto& v : values) {
          auto it = by_type.find(v.type);
          if (it == by_type.end()) it = by_type.emplace(v.type, normalize_value(joined, v.type).text).first;
          if (it->second != v.normalized) continue;
          SchemaItem item = SchemaItem::of_column(v.column);
          if (registry.try_accept(turn, item, v.raw, s, s + n))
            out.push_back({turn, s, s + n, item, MatchKind::ValueMatch, v.raw});
        }
      }
    }
  }
  return out;
}

std::optional<std::string> canonical_number(std::string_view raw) {
  static const std::regex kNumber(R"(^([+-]?)(\d{1,3}(?:,\d{3})+|\d*)(?:\.(\d*))?$)");
  std::string s = text::trim(raw);
  std::smatch m;
  if (!std::regex_match(s, m, kNumber)) return std::nullopt;
  std::string sign = m[1].str();
  std::string whole = m[2].str();
  std::string frac = m[3].matched ? m[3].str() : "";
  if (whole.empty() && frac.empty()) return std::nullopt;
  whole.erase(std::remove(whole.begin(), whole.end(), ','), whole.end());
  auto nz = whole.find_first_not_of('0');
  whole = nz == std::string::npos ? "0" : whole.substr(nz);
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string out = whole;
  if (!frac.empty()) out += "." + frac;
  if (sign == "-" && out != "0") out = "-" + out;
  return out;
}

std::optional<std::string> parse_date(std::string_view raw) {
  static const std::regex kIsoPrefix(R"(^\s*(\d{4})[-/.](\d{1,2})[-/.](\d{1,2})(?:$|[ T].*$))");
  std::string s(raw);
  std::smatch m;
  if (std::regex_match(s, m, kIsoPrefix))
    return format_date(std::stoi(m[1].str()), std::stoi(m[2].str()), std::stoi(m[3].str()));

  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      parts.push_back(std::move(cur)), cur.clear();
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  if (parts.size() != 3) return std::nullopt;
  for (auto& p : parts) p = strip_ordinal(p);

  int month_pos = -1;
  for (int i = 0; i < 3; ++i) {
    if (!is_digits(parts[i])) {
      if (month_pos >= 0 || month_from_name(parts[i]) == 0) return std::nullopt;
      month_pos = i;
    }
  }
  auto num = [&](int i) { return parts[i].size() > 9 ? -1 : std::stoi(parts[i]); };
  if (month_pos < 0) {
    if (parts[0].size() == 4) return format_date(num(0), num(1), num(2));
    if (parts[2].size() == 4) return format_date(num(2), num(0), num(1));  // M/D/Y
    return std::nullopt;
  }
  int month = month_from_name(parts[month_pos]);
  std::vector<int> rest;
  for (int i = 0; i < 3; ++i)
    if (i != month_pos) rest.push_back(i);
  int a = rest[0], b = rest[1];
  if (parts[b].size() == 4 && parts[a].size() <= 2) return format_date(num(b), month, num(a));
  if (parts[a].size() == 4 && parts[b].size() <= 2) return format_date(num(a), month, num(b));
  return std::nullopt;
}

NormalizedValue normalize_value(std::string_view raw, ColumnType hint) {
  switch (hint) {
    case ColumnType::Date:
      if (auto d = parse_date(raw)) return {*d, false};
      return {text::collapse_whitespace(raw), true};
    case ColumnType::Integer:
    case ColumnType::Real:
      if (auto n = canonical_number(raw)) return {*n, false};
      return {text::collapse_whitespace(raw), false};
    default:
      return {text::collapse_whitespace(raw), false};
  }
}

}  // namespace structsql
