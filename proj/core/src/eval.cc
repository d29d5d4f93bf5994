#include "structsql/eval.h"

#include <cstdio>
#include <map>

#include "structsql/error.h"
#include "structsql/parallel.h"

namespace structsql {

bool exact_set_match(const sql::Query& pred, const sql::Query& gold, const DatabaseSchema* schema) {
  sql::ComponentOptions opts{false, schema};
  return sql::component_set(pred, opts) == sql::component_set(gold, opts);
}

bool logical_form_match(const sql::Query& pred, const sql::Query& gold, const DatabaseSchema* schema) {
  sql::ComponentOptions opts{true, schema};
  return sql::component_set(pred, opts) == sql::component_set(gold, opts);
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Match: return "match";
    case Verdict::Mismatch: return "mismatch";
    case Verdict::ParseFailure: return "parse-failure";
    case Verdict::SchemaViolation: return "schema-violation";
  }
  return "mismatch";
}

namespace {

ExampleResult score_one(const EvalExample& ex, const DatabaseSchema* schema) {
  sql::Query gold;
  try {
    gold = sql::parse_sql(ex.gold, schema);
  } catch (const Error& e) {
    throw MalformedDocument("gold SQL does not parse (" + std::string(e.what()) + "): " + ex.gold);
  }
  ExampleResult r;
  sql::Query pred;
  try {
    pred = sql::parse_sql(ex.pred, schema);
  } catch (const SchemaViolation& e) {
    r.verdict = Verdict::SchemaViolation;
    r.detail = e.what();
    return r;
  } catch (const SqlSyntaxError& e) {
    r.verdict = Verdict::ParseFailure;
    r.detail = e.what();
    return r;
  }
  r.verdict = exact_set_match(pred, gold, schema) ? Verdict::Match : Verdict::Mismatch;
  r.lx = logical_form_match(pred, gold, schema);
  return r;
}

std::string rate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace

EvaluationReport score_corpus(const std::vector<EvalExample>& examples, const SchemaResolver& resolver, unsigned workers) {
  if (examples.empty()) throw EmptyCorpus("no examples to score");
  EvaluationReport rep;
  rep.examples = parallel_map(examples.size(), workers, [&](std::size_t i) {
    const auto& ex = examples[i];
    return score_one(ex, resolver ? resolver(ex.db_id) : nullptr);
  });

  rep.total = examples.size();
  std::size_t lx_hits = 0;
  std::map<std::string, std::pair<std::size_t, bool>> groups;  // size, all matched
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& r = rep.examples[i];
    switch (r.verdict) {
      case Verdict::Match: ++rep.matched; break;
      case Verdict::Mismatch: ++rep.mismatches; break;
      case Verdict::ParseFailure: ++rep.parse_failures; break;
      case Verdict::SchemaViolation: ++rep.schema_violations; break;
    }
    if (r.lx) ++lx_hits;
    auto& g = groups.try_emplace(examples[i].interaction_id, 0, true).first->second;
    ++g.first;
    g.second = g.second && r.verdict == Verdict::Match;
  }
  const double n = static_cast<double>(rep.total);
  rep.em = static_cast<double>(rep.matched) / n;
  rep.qm = rep.em;
  rep.lx = static_cast<double>(lx_hits) / n;
  rep.interactions = groups.size();
  bool multi = false;
  for (const auto& [id, g] : groups) {
    if (g.first > 1) multi = true;
    if (g.second) ++rep.interactions_matched;
  }
  if (multi) rep.im = static_cast<double>(rep.interactions_matched) / static_cast<double>(rep.interactions);
  return rep;
}

nlohmann::json EvaluationReport::to_json(bool include_examples) const {
  nlohmann::json doc = {
      {"lx", lx},
      {"em", em},
      {"qm", qm},
      {"im", im ? nlohmann::json(*im) : nlohmann::json(nullptr)},
      {"total", total},
      {"matched", matched},
      {"interactions", interactions},
      {"interactions_matched", interactions_matched},
      {"errors", {{"parse-failure", parse_failures}, {"schema-violation", schema_violations}, {"mismatch", mismatches}}},
  };
  if (include_examples) {
    auto& arr = doc["examples"] = nlohmann::json::array();
    for (const auto& e : examples) {
      nlohmann::json item = {{"verdict", verdict_name(e.verdict)}, {"lx", e.lx}};
      if (!e.detail.empty()) item["detail"] = e.detail;
      arr.push_back(std::move(item));
    }
  }
  return doc;
}

std::string EvaluationReport::summary() const {
  std::string out;
  out += "questions     " + std::to_string(total) + "\n";
  out += "EM            " + rate(em) + "\n";
  out += "LX            " + rate(lx) + "\n";
  out += "QM            " + rate(qm) + "\n";
  out += "IM            " + (im ? rate(*im) : std::string("n/a (single-turn)")) + "\n";
  out += "mismatch      " + std::to_string(mismatches) + "\n";
  out += "parse-failure " + std::to_string(parse_failures) + "\n";
  out += "schema-viol.  " + std::to_string(schema_violations) + "\n";
  return out;
}

}  // namespace structsql
