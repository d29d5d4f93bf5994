#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "structsql/schema.h"

namespace structsql {

enum class Language { English, Chinese };

/// Tokenized dialogue turns, most recent last.
struct QuestionTokens {
  std::vector<std::vector<std::string>> turns;
  Language language = Language::English;

  /// Tokenizes raw turns. Throws MalformedDocument if a turn has no tokens.
  static QuestionTokens from_text(const std::vector<std::string>& turns,
                                  Language language = Language::English);
};

/// Whitespace split with leading/trailing punctuation peeled into separate
/// tokens. Chinese text (and any CJK code point) is split per character.
std::vector<std::string> tokenize_question(std::string_view text, Language language);

enum class MatchKind { ExactMatch, PartialMatch, ValueMatch };
std::string_view match_kind_name(MatchKind kind);  // "Exact-Match", ...

/// A table (column == -1) or a column.
struct SchemaItem {
  int table = -1;
  int column = -1;

  bool is_table() const { return column < 0; }
  ColumnRef column_ref() const { return {table, column}; }
  static SchemaItem of_table(int t) { return {t, -1}; }
  static SchemaItem of_column(ColumnRef c) { return {c.table, c.column}; }
  auto operator<=>(const SchemaItem&) const = default;
};

/// Half-open token span [start, end) within one turn, aligned to a schema
/// item. ValueMatch annotations carry the stored cell value they matched.
struct LinkAnnotation {
  std::size_t turn = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  SchemaItem target;
  MatchKind kind = MatchKind::ExactMatch;
  std::optional<std::string> value;

  bool operator==(const LinkAnnotation&) const = default;
};

/// Normalized form of a schema or question phrase: lowercase word tokens with
/// underscores split and a trailing plural "s" removed.
std::vector<std::string> normalize_name(std::string_view name);
std::string normalize_word(std::string_view word);

/// Exact and partial n-gram alignment between question turns and schema
/// names. Partial matches require the n-gram to be a proper contiguous token
/// run of the name; n-grams made only of stop words never match partially.
std::vector<LinkAnnotation> name_link(const QuestionTokens& question, const DatabaseSchema& schema,
                                      std::size_t max_ngram = 5);

/// Matches question n-grams against normalized cell values. Returns an empty
/// list when the schema carries no content.
std::vector<LinkAnnotation> value_link(const QuestionTokens& question, const DatabaseSchema& schema,
                                       std::size_t max_ngram = 5);

struct NormalizedValue {
  std::string text;
  bool unparseable = false;  // a Date hint could not be parsed; text normalization used
};

/// Dates become YYYY-MM-DD, numbers canonical decimals, text lowercase with
/// whitespace collapsed.
NormalizedValue normalize_value(std::string_view raw, ColumnType hint);

/// Parses common date spellings into (year, month, day), validating the day
/// against the calendar.
std::optional<std::string> parse_date(std::string_view raw);
/// Canonical decimal: no separators, sign only when negative, no leading or
/// trailing zeros. std::nullopt when `raw` is not a number.
std::optional<std::string> canonical_number(std::string_view raw);

}  // namespace structsql
