#pragma once

#include <string>
#include <vector>

#include "structsql/schema.h"
#include "structsql/schema_graph.h"
#include "structsql/sql_ast.h"

namespace structsql {

enum class ConnectorMode {
  Auto,    // exact up to kExactConnectorLimit tables, greedy beyond
  Greedy,  // repeatedly join the two closest components
  Exact,   // smallest connected superset by exhaustive search
};

inline constexpr std::size_t kExactConnectorLimit = 10;

/// Smallest set of tables containing `terminals` whose table-link subgraph is
/// connected, ascending. Among equal-size connectors the one whose added
/// tables, sorted, are lexicographically smallest wins. Throws Disconnected.
std::vector<int> connect_terminals(const SchemaGraph& graph, const std::vector<int>& terminals,
                                   ConnectorMode mode = ConnectorMode::Auto);

struct CompletionPlan {
  std::vector<std::string> added_tables;
  std::vector<sql::JoinCondition> join_conditions;  // the conditions completion added
  std::vector<std::string> added_columns;           // "Table.Column" join keys on added tables
  std::vector<std::string> rationale;
  bool empty() const { return added_tables.empty() && join_conditions.empty(); }
};

struct Completion {
  sql::Query query;
  CompletionPlan plan;
};

/// Rewrites every SELECT block whose FROM clause does not join all tables it
/// mentions. Conditions are child.fk = parent.pk; other clauses are left
/// alone. Throws Disconnected or MissingJoinKey.
Completion complete_sql(const sql::Query& q, const DatabaseSchema& schema, const SchemaGraph& graph,
                        ConnectorMode mode = ConnectorMode::Auto);

}  // namespace structsql
