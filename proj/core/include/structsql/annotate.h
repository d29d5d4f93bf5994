#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "structsql/linking.h"
#include "structsql/schema.h"
#include "structsql/sql_ast.h"

namespace structsql {

/// Region a serialized token belongs to.
enum class Segment {
  QuestionTurn,   // SegmentTag::turn holds the chronological turn index
  TurnSeparator,  // "|" between turns
  PrevSql,
  Table,
  Column,
  Value,          // matched cell values attached behind a column
  Relation,       // table names inside "A links to B" statements
  Mark,
};

struct SegmentTag {
  Segment kind = Segment::Mark;
  int turn = -1;
  bool operator==(const SegmentTag&) const = default;
};

/// Structure-marked model input. No token contains whitespace, so the
/// single-space rendering splits back into exactly `tokens`.
struct AnnotatedInput {
  std::vector<std::string> tokens;
  std::vector<SegmentTag> segments;  // parallel to tokens

  void push(std::string token, SegmentTag tag);
  void append(const AnnotatedInput& other);
  std::string render() const;
  std::size_t size() const { return tokens.size(); }
  bool operator==(const AnnotatedInput&) const = default;
};

/// The closed set of mark surface forms. "links to" is realized as the two
/// tokens "links" and "to".
std::span<const std::string_view> mark_vocabulary();
bool is_mark_token(std::string_view token);

inline constexpr std::string_view kTableMarker = "[TABLE]";
inline constexpr std::string_view kColumnMarker = "[COLUMN]";
inline constexpr std::string_view kTurnSeparator = "|";

/// Which structure-mark families are emitted. With everything off the output
/// is the plain "[TABLE] t1 .. [COLUMN] c1 .." layout behind the question.
struct MarkOptions {
  bool schema_property = true;     // match, key and type prefixes
  bool database_structure = true;  // "A links to B" statements
  bool discourse = true;           // previous SQL
  bool include_values = false;     // matched values behind their column

  static MarkOptions none() { return {false, false, false, false}; }
};

/// [TABLE] tables [COLUMN] Table.Column entries with mark prefixes joined by
/// "&" in the order match-kind, Primary-Key, type. Throws UnknownLinkTarget.
AnnotatedInput linearize_schema(const DatabaseSchema& schema, std::span<const LinkAnnotation> links,
                                bool include_values, bool schema_property = true);

/// One "T1 links to T2" statement per linked table pair, T1 declared first.
AnnotatedInput render_relations(const DatabaseSchema& schema);

/// Current turn, earlier turns newest first, previous SQL, schema, relations.
AnnotatedInput build_input(const QuestionTokens& turns, const DatabaseSchema& schema,
                           std::span<const LinkAnnotation> links, const sql::Query* prev_sql,
                           const MarkOptions& options = {});

}  // namespace structsql
