// structsql command-line driver: one subcommand per pipeline stage plus
// `run` for the whole pipeline and `gen` for synthetic corpora.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "structsql/annotate.h"
#include "structsql/complete.h"
#include "structsql/dataset.h"
#include "structsql/decode.h"
#include "structsql/error.h"
#include "structsql/eval.h"
#include "structsql/external_scorer.h"
#include "structsql/linking.h"
#include "structsql/parallel.h"
#include "structsql/pipeline.h"
#include "structsql/prefix_trie.h"
#include "structsql/schema_graph.h"
#include "structsql/sql_ast.h"
#include "structsql/synthetic.h"
#include "structsql/text.h"

namespace ss = structsql;

namespace {

constexpr int kExitStage = 1;
constexpr int kExitConfig = 2;

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ss::ConfigError("cannot open " + path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

// Output stream: a file when a path is given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw ss::ConfigError("cannot write " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct SchemaArgs {
  std::string tables;
  std::string content;
  std::string db;

  void add(CLI::App* app) {
    app->add_option("--tables", tables, "Spider-format tables document")->required();
    app->add_option("--content", content, "cell values keyed by [db_id/]Table.Column");
    app->add_option("--db", db, "database id (default: the only database)");
  }

  ss::SchemaCatalog load() const {
    ss::SchemaCatalog catalog(ss::load_schema_file(tables));
    if (!content.empty()) catalog.attach_content(ss::load_content_file(content));
    return catalog;
  }

  const ss::DatabaseSchema& pick(const ss::SchemaCatalog& catalog) const {
    if (!db.empty()) return catalog.at(db);
    if (catalog.size() != 1) throw ss::ConfigError("--db is required when the tables document has several databases");
    return catalog.schemas().front();
  }
};

nlohmann::json link_json(const ss::LinkAnnotation& a, const ss::DatabaseSchema& schema) {
  nlohmann::json j = {{"turn", a.turn},
                      {"start", a.start},
                      {"end", a.end},
                      {"target", a.target.is_table() ? schema.table(a.target.table).name
                                                     : schema.qualified_name(a.target.column_ref())},
                      {"kind", ss::match_kind_name(a.kind)}};
  if (a.value) j["value"] = *a.value;
  return j;
}

std::vector<ss::LinkAnnotation> all_links(const ss::QuestionTokens& q, const ss::DatabaseSchema& schema,
                                          std::size_t max_ngram) {
  auto links = ss::name_link(q, schema, max_ngram);
  auto values = ss::value_link(q, schema, max_ngram);
  links.insert(links.end(), values.begin(), values.end());
  return links;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structure-aware text-to-SQL toolkit"};
  app.require_subcommand(1);

  // link
  SchemaArgs link_schema;
  std::vector<std::string> link_questions;
  std::size_t link_ngram = 5;
  auto* link = app.add_subcommand("link", "align question n-grams with schema items and values");
  link_schema.add(link);
  std::string link_data;
  auto* link_q = link->add_option("-q,--question", link_questions, "dialogue turns, oldest first");
  auto* link_d = link->add_option("--data", link_data, "dataset document; one record line per question");
  link_q->excludes(link_d);
  link->add_option("--max-ngram", link_ngram, "longest n-gram considered")->capture_default_str();

  // annotate
  SchemaArgs ann_schema;
  std::vector<std::string> ann_questions;
  std::string ann_prev;
  bool no_property = false, no_structure = false, no_discourse = false, with_values = false;
  auto* annotate = app.add_subcommand("annotate", "serialize a question and schema with structure marks");
  ann_schema.add(annotate);
  std::string ann_data, ann_out;
  auto* ann_q = annotate->add_option("-q,--question", ann_questions, "dialogue turns, oldest first");
  auto* ann_d = annotate->add_option("--data", ann_data, "dataset document; writes <out>.source and <out>.target");
  ann_q->excludes(ann_d);
  annotate->add_option("-o,--output", ann_out, "output prefix for --data")->needs(ann_d);
  annotate->add_option("--prev-sql", ann_prev, "previous turn's SQL");
  annotate->add_flag("--no-schema-property", no_property, "omit match, key and type marks");
  annotate->add_flag("--no-database-structure", no_structure, "omit 'A links to B' statements");
  annotate->add_flag("--no-discourse", no_discourse, "omit the previous SQL");
  annotate->add_flag("--values", with_values, "append matched cell values behind columns");

  // decode
  SchemaArgs dec_schema;
  std::string dec_input, dec_output, dec_scorer = "oracle:", dec_vocab, dec_vocab_out;
  int dec_beam = 5, dec_max_len = 200;
  bool dec_no_constraint = false, dec_value_mode = false;
  auto* decode = app.add_subcommand("decode", "constrained beam search over annotated inputs");
  dec_schema.add(decode);
  decode->add_option("--input", dec_input, "annotated inputs, one per line")->required();
  decode->add_option("--scorer", dec_scorer, "oracle:<targets file> | random:<seed> | extern:<endpoint>")->required();
  decode->add_option("--beam", dec_beam, "beam width")->capture_default_str();
  decode->add_option("--max-len", dec_max_len, "maximum output tokens")->capture_default_str();
  decode->add_flag("--no-constraint", dec_no_constraint, "disable schema-trie filtering");
  decode->add_flag("--value-mode", dec_value_mode, "constrain quoted literals to stored values");
  decode->add_option("--vocab", dec_vocab, "vocabulary file (default: built from schema and targets)");
  decode->add_option("--save-vocab", dec_vocab_out, "write the vocabulary used");
  decode->add_option("-o,--output", dec_output, "decoded SQL, one per line (default stdout)");

  // complete
  SchemaArgs comp_schema;
  std::string comp_input, comp_output, comp_plan, comp_mode = "auto";
  auto* complete = app.add_subcommand("complete", "add missing FROM tables and join conditions");
  comp_schema.add(complete);
  complete->add_option("--input", comp_input, "SQL lines, optionally 'SQL<TAB>db_id'")->required();
  complete->add_option("-o,--output", comp_output, "completed SQL lines (default stdout)");
  complete->add_option("--plan", comp_plan, "plan report, one JSON object per line");
  complete->add_option("--connector", comp_mode, "auto | greedy | exact")
      ->check(CLI::IsMember({"auto", "greedy", "exact"}))
      ->capture_default_str();

  // evaluate
  SchemaArgs ev_schema;
  std::string ev_pred, ev_gold, ev_ids, ev_report;
  unsigned ev_workers = 0;
  auto* evaluate = app.add_subcommand("evaluate", "EM, LX, QM and IM over prediction files");
  ev_schema.add(evaluate);
  evaluate->add_option("--pred", ev_pred, "predicted SQL, one per line")->required();
  evaluate->add_option("--gold", ev_gold, "gold lines 'SQL<TAB>db_id'")->required();
  evaluate->add_option("--interactions", ev_ids, "interaction id per line (default: one per question)");
  evaluate->add_option("--report", ev_report, "write the JSON report here");
  evaluate->add_option("--workers", ev_workers, "worker threads (0: one per processor)");

  // run
  std::string run_config, run_out, run_scorer;
  std::optional<int> run_beam, run_max_len;
  std::optional<unsigned> run_workers;
  bool run_no_constraint = false, run_no_completion = false, run_no_marks = false;
  auto* run = app.add_subcommand("run", "whole pipeline from a config document");
  run->add_option("--config", run_config, "pipeline config (JSON)")->required();
  run->add_option("--output-dir", run_out, "override output_dir");
  run->add_option("--scorer", run_scorer, "override scorer");
  run->add_option("--beam", run_beam, "override beam_width");
  run->add_option("--max-len", run_max_len, "override max_len");
  run->add_option("--workers", run_workers, "override workers");
  run->add_flag("--no-constraint", run_no_constraint, "disable constrained decoding");
  run->add_flag("--no-completion", run_no_completion, "disable SQL completion");
  run->add_flag("--no-marks", run_no_marks, "disable all structure marks");

  // gen
  ss::SyntheticOptions gen_opts;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "write a seeded synthetic corpus");
  gen->add_option("--seed", gen_opts.seed, "random seed")->capture_default_str();
  gen->add_option("--schemas", gen_opts.schemas, "number of databases")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--queries", gen_opts.queries, "number of questions")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--max-turns", gen_opts.max_turns, "turns per interaction")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*link) {
      auto catalog = link_schema.load();
      if (!link_data.empty()) {
        for (const auto& inter : ss::load_dataset_file(link_data).interactions) {
          const auto& schema = catalog.at(inter.db_id);
          std::vector<std::string> turns;
          for (std::size_t t = 0; t < inter.turns.size(); ++t) {
            turns.push_back(inter.turns[t].question);
            nlohmann::json rec = {{"interaction", inter.id}, {"turn", t}, {"db_id", inter.db_id},
                                  {"links", nlohmann::json::array()}};
            for (const auto& a : all_links(ss::QuestionTokens::from_text(turns), schema, link_ngram))
              rec["links"].push_back(link_json(a, schema));
            std::cout << rec.dump() << "\n";
          }
        }
      } else {
        if (link_questions.empty()) throw ss::ConfigError("link needs --question or --data");
        const auto& schema = link_schema.pick(catalog);
        for (const auto& a : all_links(ss::QuestionTokens::from_text(link_questions), schema, link_ngram))
          std::cout << link_json(a, schema).dump() << "\n";
      }
    } else if (*annotate) {
      auto catalog = ann_schema.load();
      ss::MarkOptions marks{!no_property, !no_structure, !no_discourse, with_values};
      if (!ann_data.empty()) {
        // Dataset mode feeds the gold SQL of the previous turn as discourse context.
        Output source(ann_out.empty() ? "" : ann_out + ".source");
        Output target(ann_out.empty() ? "" : ann_out + ".target");
        for (const auto& inter : ss::load_dataset_file(ann_data).interactions) {
          const auto& schema = catalog.at(inter.db_id);
          std::vector<std::string> turns;
          std::optional<ss::sql::Query> prev;
          for (const auto& turn : inter.turns) {
            turns.push_back(turn.question);
            auto q = ss::QuestionTokens::from_text(turns);
            auto links = all_links(q, schema, 5);
            auto gold = ss::sql::parse_sql(turn.sql, &schema);
            source.stream() << ss::build_input(q, schema, links, prev ? &*prev : nullptr, marks).render() << "\n";
            target.stream() << ss::sql::render_sql(gold) << "\n";
            prev = std::move(gold);
          }
        }
      } else {
        if (ann_questions.empty()) throw ss::ConfigError("annotate needs --question or --data");
        const auto& schema = ann_schema.pick(catalog);
        auto q = ss::QuestionTokens::from_text(ann_questions);
        auto links = all_links(q, schema, 5);
        std::optional<ss::sql::Query> prev;
        if (!ann_prev.empty()) prev = ss::sql::parse_sql(ann_prev, &schema);
        std::cout << ss::build_input(q, schema, links, prev ? &*prev : nullptr, marks).render() << "\n";
      }
    } else if (*decode) {
      auto catalog = dec_schema.load();
      const auto& schema = dec_schema.pick(catalog);
      auto spec = ss::ScorerSpec::parse(dec_scorer);
      auto inputs = read_lines(dec_input);
      std::vector<std::string> targets;
      if (spec.kind == ss::ScorerSpec::Kind::OracleFile) {
        targets = read_lines(spec.arg);
        if (targets.size() != inputs.size())
          throw ss::ConfigError("oracle target file has " + std::to_string(targets.size()) + " lines for " +
                                std::to_string(inputs.size()) + " inputs");
      } else if (spec.kind == ss::ScorerSpec::Kind::OracleGold || spec.kind == ss::ScorerSpec::Kind::AdversarialGold) {
        throw ss::ConfigError("decode takes oracle:<file>, random:<seed> or extern:<endpoint>");
      }
      ss::Vocabulary vocab = dec_vocab.empty() ? ss::build_vocabulary(catalog, targets) : ss::Vocabulary::load(dec_vocab);
      if (!dec_vocab_out.empty()) vocab.save(dec_vocab_out);
      auto trie = ss::build_trie(schema, vocab, dec_value_mode);
      ss::DecodeConstraints constraints(vocab, trie, !dec_no_constraint);
      std::unique_ptr<ss::ExternalScorer> remote;
      if (spec.kind == ss::ScorerSpec::Kind::External) {
        remote = ss::external_scorer_connect(spec.arg);
        if (remote->vocab_size() != vocab.size() || remote->eos_id() != vocab.eos_id())
          throw ss::ConfigError("remote scorer vocabulary does not match the local vocabulary");
      }
      Output out(dec_output);
      int failures = 0;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        std::unique_ptr<ss::TokenScorer> local;
        ss::TokenScorer* scorer = remote.get();
        if (spec.kind == ss::ScorerSpec::Kind::OracleFile)
          local = std::make_unique<ss::OracleScorer>(vocab.encode(targets[i]), vocab.size(), vocab.eos_id());
        else if (spec.kind == ss::ScorerSpec::Kind::Random)
          local = std::make_unique<ss::RandomScorer>(std::stoull(spec.arg), vocab.size(), vocab.eos_id());
        if (local) scorer = local.get();
        ss::DecodeInput in{std::to_string(i), {}};
        in.source = ss::text::split_whitespace(inputs[i]);
        try {
          auto result = ss::beam_search(*scorer, constraints, in, {dec_beam, dec_max_len, false});
          out.stream() << vocab.decode(result.best().tokens) << "\n";
        } catch (const ss::NoValidHypothesis& e) {
          std::cerr << "line " << i + 1 << ": " << e.what() << "\n";
          out.stream() << "\n";
          ++failures;
        }
      }
      return failures ? kExitStage : 0;
    } else if (*complete) {
      auto catalog = comp_schema.load();
      auto mode = comp_mode == "greedy" ? ss::ConnectorMode::Greedy
                  : comp_mode == "exact" ? ss::ConnectorMode::Exact
                                         : ss::ConnectorMode::Auto;
      Output out(comp_output);
      Output plan_out(comp_plan.empty() ? "/dev/null" : comp_plan);
      int failures = 0;
      auto lines = read_lines(comp_input);
      for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string sql = lines[i];
        std::string db = comp_schema.db;
        if (auto tab = sql.find('\t'); tab != std::string::npos) {
          db = sql.substr(tab + 1);
          sql.resize(tab);
        }
        const auto& schema = db.empty() ? comp_schema.pick(catalog) : catalog.at(db);
        try {
          auto graph = ss::SchemaGraph::build(schema);
          auto done = ss::complete_sql(ss::sql::parse_sql(sql, &schema), schema, graph, mode);
          out.stream() << ss::sql::render_sql(done.query) << "\n";
          nlohmann::json joins = nlohmann::json::array();
          for (const auto& j : done.plan.join_conditions)
            joins.push_back(j.left.table + "." + j.left.column + " = " + j.right.table + "." + j.right.column);
          plan_out.stream() << nlohmann::json{{"line", i + 1},
                                              {"added_tables", done.plan.added_tables},
                                              {"join_conditions", joins},
                                              {"added_columns", done.plan.added_columns},
                                              {"rationale", done.plan.rationale}}
                                   .dump()
                            << "\n";
        } catch (const ss::Error& e) {
          std::cerr << "line " << i + 1 << ": " << e.what() << "\n";
          out.stream() << sql << "\n";
          plan_out.stream() << nlohmann::json{{"line", i + 1}, {"error", e.what()}}.dump() << "\n";
          ++failures;
        }
      }
      return failures ? kExitStage : 0;
    } else if (*evaluate) {
      auto catalog = ev_schema.load();
      auto preds = read_lines(ev_pred);
      auto golds = read_lines(ev_gold);
      if (preds.size() != golds.size())
        throw ss::MismatchedLengths("prediction file has " + std::to_string(preds.size()) + " lines, gold has " +
                                    std::to_string(golds.size()));
      std::vector<std::string> ids;
      if (!ev_ids.empty()) {
        ids = read_lines(ev_ids);
        if (ids.size() != golds.size()) throw ss::MismatchedLengths("interaction file length differs from gold");
      }
      std::vector<ss::EvalExample> examples;
      for (std::size_t i = 0; i < golds.size(); ++i) {
        std::string gold = golds[i], db = ev_schema.db;
        if (auto tab = gold.find('\t'); tab != std::string::npos) {
          db = gold.substr(tab + 1);
          gold.resize(tab);
        }
        if (db.empty() && catalog.size() == 1) db = catalog.schemas().front().db_id();
        examples.push_back({preds[i], gold, ids.empty() ? "q-" + std::to_string(i) : ids[i], db});
      }
      auto report = ss::score_corpus(
          examples,
          [&](const std::string& db) {
            const auto* s = catalog.find(db);
            if (!s) throw ss::MalformedDocument("unknown db_id '" + db + "'");
            return s;
          },
          ev_workers ? ev_workers : ss::default_workers());
      if (!ev_report.empty()) Output(ev_report).stream() << report.to_json().dump(2) << "\n";
      std::cout << report.summary();
    } else if (*run) {
      auto config = ss::PipelineConfig::load(run_config);
      if (!run_out.empty()) config.output_dir = run_out;
      if (!run_scorer.empty()) config.scorer = run_scorer;
      if (run_beam) config.beam_width = *run_beam;
      if (run_max_len) config.max_len = *run_max_len;
      if (run_workers) config.workers = *run_workers;
      if (run_no_constraint) config.constrained = false;
      if (run_no_completion) config.completion = false;
      if (run_no_marks) config.marks = ss::MarkOptions::none();
      config.apply_environment();
      config = ss::PipelineConfig::from_json(config.to_json());  // revalidate overrides
      auto result = ss::run_pipeline(config);
      std::cout << result.report.summary();
      std::cout << "artifacts in " << config.output_dir << "\n";
    } else if (*gen) {
      auto corpus = ss::generate_synthetic_corpus(gen_opts);
      ss::write_corpus(corpus, gen_out);
      std::cout << "wrote " << corpus.schemas.size() << " databases and " << corpus.dataset.question_count()
                << " questions to " << gen_out << "\n";
    }
  } catch (const ss::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ss::StageError& e) {
    std::cerr << "error " << e.what() << "\n";
    return kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
  return 0;
}
