#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "structsql/schema.h"
#include "structsql/sql_ast.h"

namespace structsql {

/// Component-set equality with literal values masked.
bool exact_set_match(const sql::Query& pred, const sql::Query& gold, const DatabaseSchema* schema = nullptr);
/// Component-set equality with literal values normalized and compared.
bool logical_form_match(const sql::Query& pred, const sql::Query& gold, const DatabaseSchema* schema = nullptr);

struct EvalExample {
  std::string pred;
  std::string gold;
  std::string interaction_id;
  std::string db_id;
};

enum class Verdict { Match, Mismatch, ParseFailure, SchemaViolation };
std::string_view verdict_name(Verdict v);

struct ExampleResult {
  Verdict verdict = Verdict::Mismatch;  // exact set match verdict
  bool lx = false;
  std::string detail;  // parser message for failures
};

struct EvaluationReport {
  std::vector<ExampleResult> examples;
  double lx = 0.0;
  double em = 0.0;
  double qm = 0.0;
  std::optional<double> im;  // absent when every interaction has one question
  std::size_t total = 0;
  std::size_t matched = 0;
  std::size_t interactions = 0;
  std::size_t interactions_matched = 0;
  std::size_t parse_failures = 0;
  std::size_t schema_violations = 0;
  std::size_t mismatches = 0;

  nlohmann::json to_json(bool include_examples = true) const;
  std::string summary() const;
};

/// Resolves a db_id to its schema; may return nullptr to score unresolved.
using SchemaResolver = std::function<const DatabaseSchema*(const std::string& db_id)>;

/// Scores predictions against gold SQL. Unparseable or schema-violating
/// predictions count as misses and are tallied separately. Throws EmptyCorpus,
/// and rethrows parse errors in gold SQL as MalformedDocument.
EvaluationReport score_corpus(const std::vector<EvalExample>& examples, const SchemaResolver& resolver,
                              unsigned workers = 1);

}  // namespace structsql
