#include "structsql/pipeline.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include "structsql/complete.h"
#include "structsql/decode.h"
#include "structsql/error.h"
#include "structsql/external_scorer.h"
#include "structsql/linking.h"
#include "structsql/parallel.h"
#include "structsql/prefix_trie.h"
#include "structsql/schema_graph.h"
#include "structsql/sql_ast.h"
#include "structsql/text.h"

namespace structsql {

ScorerSpec ScorerSpec::parse(const std::string& text) {
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (head == "oracle") {
    if (arg.empty()) throw ConfigError("oracle scorer needs 'gold' or a target file");
    return {arg == "gold" ? Kind::OracleGold : Kind::OracleFile, arg == "gold" ? "" : arg};
  }
  if (head == "random") {
    if (arg.empty() || arg.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("random scorer needs a numeric seed, got '" + arg + "'");
    return {Kind::Random, arg};
  }
  if (head == "adversarial") {
    if (arg != "gold") throw ConfigError("adversarial scorer supports only 'adversarial:gold'");
    return {Kind::AdversarialGold, ""};
  }
  if (head == "extern") {
    if (arg.empty()) throw ConfigError("extern scorer needs an endpoint");
    return {Kind::External, arg};
  }
  throw ConfigError("unknown scorer '" + text + "'");
}

std::string ScorerSpec::to_string() const {
  switch (kind) {
    case Kind::OracleGold: return "oracle:gold";
    case Kind::OracleFile: return "oracle:" + arg;
    case Kind::Random: return "random:" + arg;
    case Kind::AdversarialGold: return "adversarial:gold";
    case Kind::External: return "extern:" + arg;
  }
  return "";
}

namespace {

template <class T>
void read_field(const nlohmann::json& doc, const char* key, T& out) {
  auto it = doc.find(key);
  if (it == doc.end()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> kKeys = {
      "tables", "data", "content", "output_dir", "schema_property_marks", "database_structure_marks",
      "discourse_marks", "include_values", "constrained", "value_mode", "completion", "beam_width", "max_len",
      "scorer", "vocab", "seed", "workers", "oracle_prev_sql", "max_ngram"};
  for (const auto& [k, v] : doc.items())
    if (!kKeys.count(k)) throw ConfigError("unknown config field '" + k + "'");
  PipelineConfig c;
  read_field(doc, "tables", c.tables);
  read_field(doc, "data", c.data);
  read_field(doc, "content", c.content);
  read_field(doc, "output_dir", c.output_dir);
  read_field(doc, "schema_property_marks", c.marks.schema_property);
  read_field(doc, "database_structure_marks", c.marks.database_structure);
  read_field(doc, "discourse_marks", c.marks.discourse);
  read_field(doc, "include_values", c.marks.include_values);
  read_field(doc, "constrained", c.constrained);
  read_field(doc, "value_mode", c.value_mode);
  read_field(doc, "completion", c.completion);
  read_field(doc, "beam_width", c.beam_width);
  read_field(doc, "max_len", c.max_len);
  read_field(doc, "scorer", c.scorer);
  read_field(doc, "vocab", c.vocab);
  read_field(doc, "seed", c.seed);
  read_field(doc, "workers", c.workers);
  read_field(doc, "oracle_prev_sql", c.oracle_prev_sql);
  read_field(doc, "max_ngram", c.max_ngram);
  if (c.beam_width < 1) throw ConfigError("beam_width must be at least 1");
  if (c.max_len < 1) throw ConfigError("max_len must be at least 1");
  if (c.max_ngram < 1) throw ConfigError("max_ngram must be at least 1");
  ScorerSpec::parse(c.scorer);
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config " + path + " is not valid JSON");
  return from_json(doc);
}

nlohmann::json PipelineConfig::to_json() const {
  return {
      {"tables", tables},
      {"data", data},
      {"content", content},
      {"output_dir", output_dir},
      {"schema_property_marks", marks.schema_property},
      {"database_structure_marks", marks.database_structure},
      {"discourse_marks", marks.discourse},
      {"include_values", marks.include_values},
      {"constrained", constrained},
      {"value_mode", value_mode},
      {"completion", completion},
      {"beam_width", beam_width},
      {"max_len", max_len},
      {"scorer", scorer},
      {"vocab", vocab},
      {"seed", seed},
      {"workers", workers},
      {"oracle_prev_sql", oracle_prev_sql},
      {"max_ngram", max_ngram},
  };
}

void PipelineConfig::apply_environment() {
  if (const char* env = std::getenv(kScorerEndpointEnv); env && *env) scorer = std::string("extern:") + env;
}

Vocabulary build_vocabulary(const SchemaCatalog& catalog, const std::vector<std::string>& sql_texts) {
  return Vocabulary::build(catalog.schemas(), sql_texts);
}

std::string corrupt_schema_name(const std::string& canonical_sql, const DatabaseSchema& schema) {
  auto pieces = split_pieces(canonical_sql);
  bool in_literal = false;
  std::optional<std::size_t> first_table;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (pieces[i] == "'") in_literal = !in_literal;
    if (in_literal) continue;
    if (!schema.find_table(pieces[i])) continue;
    if (i + 2 < pieces.size() && pieces[i + 1] == "." && pieces[i + 2] != "*") {
      pieces[i + 2] += "zz";
      return text::join(pieces, "");
    }
    if (!first_table) first_table = i;
  }
  if (first_table) pieces[*first_table] += "zz";
  return text::join(pieces, "");
}

namespace {

struct DbContext {
  const DatabaseSchema* schema;
  SchemaGraph graph;
  SchemaTrie trie;
  std::unique_ptr<DecodeConstraints> constraints;
};

template <class Fn>
auto in_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

nlohmann::json plan_json(const CompletionPlan& plan) {
  auto joins = nlohmann::json::array();
  for (const auto& j : plan.join_conditions)
    joins.push_back(j.left.table + "." + j.left.column + " = " + j.right.table + "." + j.right.column);
  return {{"added_tables", plan.added_tables},
          {"join_conditions", joins},
          {"added_columns", plan.added_columns},
          {"rationale", plan.rationale}};
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  auto spec = ScorerSpec::parse(config.scorer);
  if (config.tables.empty()) throw ConfigError("config lacks 'tables'");
  if (config.data.empty()) throw ConfigError("config lacks 'data'");
  const unsigned workers = config.workers ? config.workers : default_workers();

  // ingest
  SchemaCatalog catalog = in_stage("ingest", [&] { return SchemaCatalog(load_schema_file(config.tables)); });
  if (!config.content.empty())
    in_stage("ingest", [&] {
      catalog.attach_content(load_content_file(config.content));
      return 0;
    });
  Dataset dataset = in_stage("ingest", [&] { return load_dataset_file(config.data); });

  struct Item {
    std::size_t interaction;
    std::size_t turn;
  };
  std::vector<Item> items;
  std::vector<std::string> targets;
  in_stage("ingest", [&] {
    for (std::size_t i = 0; i < dataset.interactions.size(); ++i) {
      const auto& inter = dataset.interactions[i];
      const auto& schema = catalog.at(inter.db_id);
      for (std::size_t t = 0; t < inter.turns.size(); ++t) {
        items.push_back({i, t});
        try {
          targets.push_back(sql::render_sql(sql::parse_sql(inter.turns[t].sql, &schema)));
        } catch (const Error& e) {
          throw MalformedDocument("gold SQL of " + inter.id + " turn " + std::to_string(t) + ": " + e.what());
        }
      }
    }
    return 0;
  });
  if (items.empty()) throw StageError("ingest", "dataset has no questions");

  std::vector<std::string> oracle_lines;
  if (spec.kind == ScorerSpec::Kind::OracleFile) {
    std::ifstream in(spec.arg);
    if (!in) throw ConfigError("cannot open oracle target file " + spec.arg);
    for (std::string line; std::getline(in, line);) oracle_lines.push_back(line);
    if (oracle_lines.size() != items.size())
      throw ConfigError("oracle target file has " + std::to_string(oracle_lines.size()) + " lines for " +
                        std::to_string(items.size()) + " questions");
  }
  std::vector<std::string> adversarial;
  if (spec.kind == ScorerSpec::Kind::AdversarialGold)
    for (std::size_t k = 0; k < items.size(); ++k)
      adversarial.push_back(
          corrupt_schema_name(targets[k], catalog.at(dataset.interactions[items[k].interaction].db_id)));

  Vocabulary vocab = in_stage("decode", [&] {
    if (!config.vocab.empty()) return Vocabulary::load(config.vocab);
    std::vector<std::string> texts = targets;
    texts.insert(texts.end(), oracle_lines.begin(), oracle_lines.end());
    texts.insert(texts.end(), adversarial.begin(), adversarial.end());
    return build_vocabulary(catalog, texts);
  });

  std::unique_ptr<ExternalScorer> remote;
  if (spec.kind == ScorerSpec::Kind::External) {
    remote = in_stage("decode", [&] { return external_scorer_connect(spec.arg); });
    if (remote->vocab_size() != vocab.size() || remote->eos_id() != vocab.eos_id())
      throw ConfigError("remote scorer vocabulary (size " + std::to_string(remote->vocab_size()) + ", eos " +
                        std::to_string(remote->eos_id()) + ") does not match the local one (size " +
                        std::to_string(vocab.size()) + ", eos " + std::to_string(vocab.eos_id()) + ")");
  }

  std::map<std::string, DbContext> dbs;
  in_stage("decode", [&] {
    for (const auto& inter : dataset.interactions) {
      if (dbs.count(inter.db_id)) continue;
      const auto& schema = catalog.at(inter.db_id);
      auto& ctx = dbs.emplace(inter.db_id, DbContext{&schema, SchemaGraph::build(schema),
                                                     build_trie(schema, vocab, config.value_mode), nullptr})
                      .first->second;
      ctx.constraints = std::make_unique<DecodeConstraints>(vocab, ctx.trie, config.constrained);
    }
    return 0;
  });

  std::vector<std::size_t> first_item(dataset.interactions.size());
  for (std::size_t k = items.size(); k-- > 0;) first_item[items[k].interaction] = k;

  BeamOptions beam{config.beam_width, config.max_len, false};
  auto per_interaction = parallel_map(dataset.interactions.size(), workers, [&](std::size_t i) {
    const auto& inter = dataset.interactions[i];
    const auto& ctx = dbs.at(inter.db_id);
    const auto& schema = *ctx.schema;
    std::vector<QuestionRecord> out;
    std::vector<std::string> texts;
    for (std::size_t t = 0; t < inter.turns.size(); ++t) {
      const std::size_t k = first_item[i] + t;
      QuestionRecord rec;
      rec.interaction_id = inter.id;
      rec.turn = t;
      rec.db_id = inter.db_id;
      rec.target = targets[k];
      texts.push_back(inter.turns[t].question);

      auto question = in_stage("link", [&] { return QuestionTokens::from_text(texts); });
      auto links = in_stage("link", [&] {
        auto l = name_link(question, schema, config.max_ngram);
        auto v = value_link(question, schema, config.max_ngram);
        l.insert(l.end(), v.begin(), v.end());
        return l;
      });

      std::optional<sql::Query> prev;
      if (config.marks.discourse && t > 0) {
        const std::string& prev_text = config.oracle_prev_sql ? targets[k - 1] : out.back().completed;
        try {
          prev = sql::parse_sql(prev_text, &schema);
        } catch (const Error&) {
          prev.reset();
        }
      }
      auto input = in_stage("annotate", [&] {
        return build_input(question, schema, links, prev ? &*prev : nullptr, config.marks);
      });
      rec.source = input.render();

      in_stage("decode", [&] {
        std::unique_ptr<TokenScorer> local;
        TokenScorer* scorer = remote.get();
        switch (spec.kind) {
          case ScorerSpec::Kind::OracleGold:
            local = std::make_unique<OracleScorer>(vocab.encode(targets[k]), vocab.size(), vocab.eos_id());
            break;
          case ScorerSpec::Kind::OracleFile:
            local = std::make_unique<OracleScorer>(vocab.encode(oracle_lines[k]), vocab.size(), vocab.eos_id());
            break;
          case ScorerSpec::Kind::Random:
            local = std::make_unique<RandomScorer>(std::stoull(spec.arg), vocab.size(), vocab.eos_id());
            break;
          case ScorerSpec::Kind::AdversarialGold:
            local = std::make_unique<AdversarialScorer>(
                std::vector<std::vector<TokenId>>{vocab.encode(adversarial[k]), vocab.encode(targets[k])},
                vocab.size(), vocab.eos_id());
            break;
          case ScorerSpec::Kind::External:
            break;
        }
        if (local) scorer = local.get();
        DecodeInput in{inter.id + "#" + std::to_string(t), input.tokens};
        try {
          auto result = beam_search(*scorer, *ctx.constraints, in, beam);
          rec.raw_sql = vocab.decode(result.best().tokens);
        } catch (const NoValidHypothesis& e) {
          rec.error = e.what();
        }
        return 0;
      });

      rec.completed = rec.raw_sql;
      rec.plan = nullptr;
      if (config.completion && !rec.raw_sql.empty()) {
        std::optional<sql::Query> parsed;
        try {
          parsed = sql::parse_sql(rec.raw_sql, &schema);
        } catch (const Error&) {
          // Scored as a parse failure or schema violation downstream.
        }
        if (parsed) {
          try {
            auto done = complete_sql(*parsed, schema, ctx.graph);
            rec.completed = sql::render_sql(done.query);
            rec.plan = plan_json(done.plan);
          } catch (const Disconnected& e) {
            rec.error = e.what();
          } catch (const std::exception& e) {
            throw StageError("complete", e.what());
          }
        }
      }
      out.push_back(std::move(rec));
    }
    return out;
  });

  PipelineResult result;
  for (auto& group : per_interaction)
    for (auto& rec : group) result.questions.push_back(std::move(rec));

  result.report = in_stage("evaluate", [&] {
    std::vector<EvalExample> examples;
    for (const auto& q : result.questions) examples.push_back({q.completed, q.target, q.interaction_id, q.db_id});
    return score_corpus(examples, [&](const std::string& db) { return catalog.find(db); }, workers);
  });

  // Artifacts.
  in_stage("output", [&] {
    namespace fs = std::filesystem;
    fs::path dir(config.output_dir);
    fs::create_directories(dir);
    auto open = [&](const char* name) {
      std::ofstream f(dir / name);
      if (!f) throw ConfigError("cannot write " + (dir / name).string());
      return f;
    };
    {
      auto src = open("annotated.source");
      auto tgt = open("annotated.target");
      auto raw = open("raw.sql");
      auto done = open("completed.sql");
      auto gold = open("gold.sql");
      auto ids = open("interactions.txt");
      auto plans = open("plans.jsonl");
      for (const auto& q : result.questions) {
        src << q.source << "\n";
        tgt << q.target << "\n";
        raw << q.raw_sql << "\n";
        done << q.completed << "\n";
        gold << q.target << "\t" << q.db_id << "\n";
        ids << q.interaction_id << "\n";
        nlohmann::json rec = {{"interaction_id", q.interaction_id}, {"turn", q.turn}, {"db_id", q.db_id},
                              {"plan", q.plan}};
        if (!q.error.empty()) rec["error"] = q.error;
        plans << rec.dump() << "\n";
      }
    }
    open("report.json") << result.report.to_json().dump(2) << "\n";
    open("summary.txt") << result.report.summary();
    auto resolved = config.to_json();
    resolved["workers"] = workers;
    open("config.resolved.json") << resolved.dump(2) << "\n";
    vocab.save((dir / "vocab.json").string());
    return 0;
  });
  return result;
}

}  // namespace structsql
