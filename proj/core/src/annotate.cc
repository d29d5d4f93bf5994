#include "structsql/annotate.h"

#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "structsql/error.h"
#include "structsql/schema_graph.h"
#include "structsql/text.h"

namespace structsql {

void AnnotatedInput::push(std::string token, SegmentTag tag) {
  tokens.push_back(std::move(token));
  segments.push_back(tag);
}

void AnnotatedInput::append(const AnnotatedInput& other) {
  tokens.insert(tokens.end(), other.tokens.begin(), other.tokens.end());
  segments.insert(segments.end(), other.segments.begin(), other.segments.end());
}

std::string AnnotatedInput::render() const { return text::join(tokens, " "); }

std::span<const std::string_view> mark_vocabulary() {
  static constexpr std::array<std::string_view, 15> kMarks = {
      "[TABLE]", "[COLUMN]", "Exact-Match", "Partial-Match", "Value-Match",
      "Primary-Key", "Integer", "Real", "Text", "Date", "Boolean", "Other", "&", "links", "to"};
  return kMarks;
}

bool is_mark_token(std::string_view token) {
  auto marks = mark_vocabulary();
  return std::find(marks.begin(), marks.end(), token) != marks.end();
}

namespace {

constexpr SegmentTag kMark{Segment::Mark, -1};

struct ItemMarks {
  std::optional<MatchKind> name_match;
  std::vector<std::string> values;
};

std::map<SchemaItem, ItemMarks> collect_marks(const DatabaseSchema& schema, std::span<const LinkAnnotation> links) {
  std::map<SchemaItem, ItemMarks> out;
  for (const auto& link : links) {
    const auto& item = link.target;
    bool ok = item.table >= 0 && static_cast<std::size_t>(item.table) < schema.table_count() &&
              (item.is_table() ||
               static_cast<std::size_t>(item.column) < schema.table(item.table).columns.size());
    if (!ok) throw UnknownLinkTarget("link refers to a schema item outside " + schema.db_id());
    auto& marks = out[item];
    if (link.kind == MatchKind::ValueMatch) {
      if (item.is_table()) throw UnknownLinkTarget("value match must target a column");
      if (link.value && std::find(marks.values.begin(), marks.values.end(), *link.value) == marks.values.end())
        marks.values.push_back(*link.value);
    } else if (!marks.name_match || link.kind == MatchKind::ExactMatch) {
      marks.name_match = link.kind;
    }
  }
  return out;
}

void push_prefix(AnnotatedInput& out, const std::vector<std::string_view>& marks) {
  for (std::size_t i = 0; i < marks.size(); ++i) {
    if (i) out.push("&", kMark);
    out.push(std::string(marks[i]), kMark);
  }
}

}  // namespace

AnnotatedInput linearize_schema(const DatabaseSchema& schema, std::span<const LinkAnnotation> links,
                                bool include_values, bool schema_property) {
  auto marks = collect_marks(schema, links);
  AnnotatedInput out;
  out.push(std::string(kTableMarker), kMark);
  for (int t = 0; t < static_cast<int>(schema.table_count()); ++t) {
    if (schema_property) {
      auto it = marks.find(SchemaItem::of_table(t));
      if (it != marks.end() && it->second.name_match) push_prefix(out, {match_kind_name(*it->second.name_match)});
    }
    out.push(schema.table(t).name, {Segment::Table, -1});
  }
  out.push(std::string(kColumnMarker), kMark);
  for (auto ref : schema.all_columns()) {
    const auto& col = schema.column(ref);
    const ItemMarks* item = nullptr;
    if (auto it = marks.find(SchemaItem::of_column(ref)); it != marks.end()) item = &it->second;
    if (schema_property) {
      std::vector<std::string_view> prefix;
      if (item && item->name_match) prefix.push_back(match_kind_name(*item->name_match));
      if (item && !item->values.empty()) prefix.push_back(match_kind_name(MatchKind::ValueMatch));
      if (col.is_primary) prefix.push_back("Primary-Key");
      prefix.push_back(column_type_name(col.type));
      push_prefix(out, prefix);
    }
    out.push(schema.qualified_name(ref), {Segment::Column, -1});
    if (schema_property && include_values && item) {
      for (const auto& v : item->values) {
        out.push("&", kMark);
        for (auto& piece : text::split_whitespace(v)) out.push(std::move(piece), {Segment::Value, -1});
      }
    }
  }
  return out;
}

AnnotatedInput render_relations(const DatabaseSchema& schema) {
  auto graph = SchemaGraph::build(schema);
  AnnotatedInput out;
  for (int a = 0; a < static_cast<int>(schema.table_count()); ++a) {
    for (int b : graph.table_neighbors(a)) {
      if (b <= a) continue;
      out.push(schema.table(a).name, {Segment::Relation, -1});
      out.push("links", kMark);
      out.push("to", kMark);
      out.push(schema.table(b).name, {Segment::Relation, -1});
    }
  }
  return out;
}

AnnotatedInput build_input(const QuestionTokens& turns, const DatabaseSchema& schema,
                           std::span<const LinkAnnotation> links, const sql::Query* prev_sql,
                           const MarkOptions& options) {
  if (turns.turns.empty()) throw MalformedDocument("build_input needs at least one question turn");
  AnnotatedInput out;
  for (std::size_t k = turns.turns.size(); k-- > 0;) {
    if (k + 1 != turns.turns.size()) out.push(std::string(kTurnSeparator), {Segment::TurnSeparator, -1});
    for (const auto& tok : turns.turns[k])
      for (auto& piece : text::split_whitespace(tok)) out.push(std::move(piece), {Segment::QuestionTurn, static_cast<int>(k)});
  }
  if (options.discourse && prev_sql) {
    for (auto& tok : text::split_whitespace(sql::render_sql(*prev_sql))) out.push(std::move(tok), {Segment::PrevSql, -1});
  }
  out.append(linearize_schema(schema, links, options.include_values, options.schema_property));
  if (options.database_structure) out.append(render_relations(schema));
  return out;
}

}  // namespace structsql
