#pragma once

#include <string>
#include <vector>

#include "structsql/schema.h"

namespace structsql::testing {

inline std::string data_path(const std::string& name) { return std::string(STRUCTSQL_TEST_DATA) + "/" + name; }

inline DatabaseSchema tennis() { return load_schema_file(data_path("tennis_tables.json")).front(); }

inline DatabaseSchema tennis_with_content() {
  return tennis().with_content(load_content_file(data_path("tennis_content.json")));
}

/// Schema built from table -> columns lists. The first column of each table
/// is its primary key; `fks` are (child table, child column, parent table,
/// parent column) index quadruples.
struct QuickFk {
  int child_table, child_column, parent_table, parent_column;
};

inline DatabaseSchema quick_schema(const std::vector<std::pair<std::string, std::vector<std::string>>>& tables,
                                   const std::vector<QuickFk>& fks = {}, const std::string& db_id = "quick") {
  std::vector<TableDef> defs;
  for (const auto& [name, cols] : tables) {
    TableDef t;
    t.name = name;
    for (std::size_t i = 0; i < cols.size(); ++i)
      t.columns.push_back({cols[i], ColumnType::Integer, "number", i == 0, {}, {}});
    if (!cols.empty()) t.primary_key = 0;
    defs.push_back(std::move(t));
  }
  std::vector<ForeignKey> keys;
  for (const auto& f : fks) keys.push_back({{f.child_table, f.child_column}, {f.parent_table, f.parent_column}});
  return DatabaseSchema::build(db_id, std::move(defs), std::move(keys));
}

}  // namespace structsql::testing
