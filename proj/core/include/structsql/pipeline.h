#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "structsql/annotate.h"
#include "structsql/dataset.h"
#include "structsql/eval.h"
#include "structsql/schema.h"
#include "structsql/vocabulary.h"

namespace structsql {

/// Environment variable that, when set, replaces the configured scorer with
/// "extern:<value>".
inline constexpr const char* kScorerEndpointEnv = "STRUCTSQL_SCORER_ENDPOINT";

struct ScorerSpec {
  enum class Kind { OracleGold, OracleFile, Random, AdversarialGold, External };
  Kind kind = Kind::OracleGold;
  std::string arg;  // file, seed or endpoint

  /// "oracle:gold", "oracle:<file>", "random:<seed>", "adversarial:gold",
  /// "extern:<endpoint>". Throws ConfigError.
  static ScorerSpec parse(const std::string& text);
  std::string to_string() const;
};

struct PipelineConfig {
  std::string tables;   // Spider tables document
  std::string data;     // dataset document
  std::string content;  // optional content document
  std::string output_dir = "out";
  MarkOptions marks;
  bool constrained = true;
  bool value_mode = false;  // constrain quoted literals to stored values
  bool completion = true;
  int beam_width = 5;
  int max_len = 200;
  std::string scorer = "oracle:gold";
  std::string vocab;  // optional vocabulary file; built from the data otherwise
  std::uint64_t seed = 1;
  unsigned workers = 0;  // 0: one per processor
  bool oracle_prev_sql = false;  // feed gold instead of predicted previous SQL
  std::size_t max_ngram = 5;

  /// Unknown keys and wrong types throw ConfigError. Relative paths are kept
  /// as written.
  static PipelineConfig from_json(const nlohmann::json& doc);
  static PipelineConfig load(const std::string& path);
  nlohmann::json to_json() const;
  /// Applies kScorerEndpointEnv when set.
  void apply_environment();
};

struct QuestionRecord {
  std::string interaction_id;
  std::size_t turn = 0;
  std::string db_id;
  std::string source;     // rendered annotated input
  std::string target;     // canonical gold SQL
  std::string raw_sql;    // top beam hypothesis
  std::string completed;  // after completion (equal to raw_sql when disabled or unparseable)
  nlohmann::json plan;    // completion plan or null
  std::string error;      // decode or completion problem, empty if none
};

struct PipelineResult {
  std::vector<QuestionRecord> questions;
  EvaluationReport report;
};

/// Runs link -> annotate -> decode -> complete -> evaluate and writes every
/// stage's output into config.output_dir. Throws ConfigError for invalid
/// settings and StageError (tagged ingest, link, annotate, decode, complete
/// or evaluate) for failures inside a stage.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Vocabulary over the schemas plus the canonical forms of `sql_texts`.
Vocabulary build_vocabulary(const SchemaCatalog& catalog, const std::vector<std::string>& sql_texts);

/// Same SQL with one schema name replaced by a look-alike that is not in the
/// schema (a column of the first qualified reference, else the first table).
std::string corrupt_schema_name(const std::string& canonical_sql, const DatabaseSchema& schema);

}  // namespace structsql
