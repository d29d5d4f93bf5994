#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "structsql/dataset.h"
#include "structsql/schema.h"
#include "structsql/sql_ast.h"

namespace structsql {

struct QueryShape {
  int max_joins = 2;
  bool allow_nested = true;
  bool allow_set_ops = true;
};

/// Random query over `schema` whose FROM tables are joined along foreign keys.
/// Literals are drawn from the columns' sample values when present.
sql::Query random_query(const DatabaseSchema& schema, std::mt19937_64& rng, const QueryShape& shape = {});

/// Random schema with 2..8 tables linked in a chain or star of foreign keys.
/// Every table has an "<Table>_id" primary key. Sample values are attached.
DatabaseSchema random_schema(std::mt19937_64& rng, const std::string& db_id);

struct SyntheticOptions {
  std::uint64_t seed = 1;
  std::size_t schemas = 20;
  std::size_t queries = 200;  // total questions
  std::size_t max_turns = 3;
  QueryShape shape;
};

struct SyntheticCorpus {
  std::vector<DatabaseSchema> schemas;  // with sample values
  Dataset dataset;
  ContentMap content;  // "db_id/Table.Column" keys
};

/// Deterministic for a given options value.
SyntheticCorpus generate_synthetic_corpus(const SyntheticOptions& options);

/// Writes tables.json, dataset.json and content.json into `dir` (created if
/// missing).
void write_corpus(const SyntheticCorpus& corpus, const std::string& dir);

}  // namespace structsql
