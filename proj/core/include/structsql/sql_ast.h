#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "structsql/box.h"
#include "structsql/schema.h"

namespace structsql::sql {

enum class Agg { None, Count, Sum, Avg, Min, Max };
enum class ArithOp { None, Add, Sub, Mul, Div };
enum class CompareOp { Eq, Ne, Lt, Gt, Le, Ge, Like, In, NotIn, Between };
enum class SetOp { Union, Intersect, Except };
enum class OrderDir { Asc, Desc };

std::string_view agg_name(Agg agg);
std::string_view compare_op_name(CompareOp op);
std::string_view set_op_name(SetOp op);

/// Column reference after alias resolution. An empty table means the column
/// was left unqualified (no schema available); column "*" is the star.
struct ColumnName {
  std::string table;
  std::string column;
  bool is_star() const { return column == "*"; }
  bool operator==(const ColumnName&) const = default;
};

struct ColUnit {
  Agg agg = Agg::None;
  bool distinct = false;
  ColumnName col;
  bool operator==(const ColUnit&) const = default;
};

/// `left` or `left <op> right`.
struct ValUnit {
  ColUnit left;
  ArithOp op = ArithOp::None;
  ColUnit right;  // meaningful only when op != None
  bool operator==(const ValUnit&) const = default;
};

struct Literal {
  enum class Kind { Number, String };
  Kind kind = Kind::Number;
  std::string text;  // numbers as written, strings unescaped
  bool operator==(const Literal&) const = default;
};

struct Query;

using Operand = std::variant<Literal, ColUnit, Box<Query>>;

struct Predicate {
  ValUnit left;
  CompareOp op = CompareOp::Eq;
  Operand right;
  std::optional<Operand> upper;  // BETWEEN only
  bool operator==(const Predicate&) const = default;
};

/// Boolean tree. And/Or nodes are kept flat (no And directly under And).
struct Condition {
  enum class Kind { Predicate, And, Or };
  Kind kind = Kind::Predicate;
  Predicate predicate;
  std::vector<Condition> children;

  static Condition leaf(Predicate p) { return {Kind::Predicate, std::move(p), {}}; }
  static Condition conjunction(Kind kind, std::vector<Condition> children);
  bool operator==(const Condition&) const = default;
};

/// `left = right` inside an ON clause.
struct JoinCondition {
  ColumnName left;
  ColumnName right;
  bool operator==(const JoinCondition&) const = default;
};

struct FromClause {
  std::vector<std::string> tables;
  std::vector<JoinCondition> joins;
  bool operator==(const FromClause&) const = default;
};

struct OrderItem {
  ValUnit expr;
  OrderDir dir = OrderDir::Asc;
  bool operator==(const OrderItem&) const = default;
};

struct Query {
  bool distinct = false;
  std::vector<ValUnit> select;
  FromClause from;
  std::optional<Condition> where;
  std::vector<ColumnName> group_by;
  std::optional<Condition> having;
  std::vector<OrderItem> order_by;
  std::optional<std::int64_t> limit;
  std::optional<SetOp> set_op;
  Box<Query> set_rhs;

  bool operator==(const Query&) const = default;
};

/// Parses the supported SQL subset. With a schema, identifiers are checked and
/// rewritten to their declared spelling and unqualified columns are bound to a
/// table. Aliases are always resolved away.
///
/// Throws SqlSyntaxError, UnknownTable, UnresolvableColumn or AmbiguousColumn.
Query parse_sql(std::string_view text, const DatabaseSchema* schema = nullptr);

/// Canonical text: uppercase keywords, qualified columns, single spaces and
/// explicit JOIN ... ON.
std::string render_sql(const Query& q);

/// Case-insensitive string set used for mentioned tables and columns.
struct ILess {
  bool operator()(const std::string& a, const std::string& b) const;
};
using NameSet = std::set<std::string, ILess>;

struct MentionedSchema {
  NameSet tables;
  NameSet columns;  // "Table.Column", "Table.*"
};

/// Tables and columns referenced anywhere in the query, nested queries and
/// set-operation branches included.
MentionedSchema mentioned_schema(const Query& q);

/// Same, restricted to one SELECT block (no nested queries, no set branch).
MentionedSchema block_mentions(const Query& q);

struct ComponentOptions {
  bool compare_values = false;
  const DatabaseSchema* schema = nullptr;  // supplies type hints for literals
};

/// Order-insensitive decomposition of a query into per-clause components.
struct ComponentSet {
  bool distinct = false;
  std::vector<std::string> select;      // sorted multiset
  std::vector<std::string> from_tables; // sorted set
  std::vector<std::string> joins;       // sorted set of unordered pairs
  std::string where;
  std::vector<std::string> group_by;    // sorted set
  std::string having;
  std::vector<std::string> order_by;    // ordered
  std::string limit;
  std::string set_op;                   // "union:<nested>" etc.

  bool operator==(const ComponentSet&) const = default;
  std::string to_string() const;
};

ComponentSet component_set(const Query& q, const ComponentOptions& options = {});

}  // namespace structsql::sql
