#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "structsql/complete.h"
#include "structsql/linking.h"
#include "structsql/schema_graph.h"
#include "structsql/sql_ast.h"
#include "structsql/synthetic.h"

namespace ss = structsql;

namespace {

struct Corpus {
  ss::DatabaseSchema schema;
  std::vector<std::string> texts;
};

Corpus make_corpus() {
  std::mt19937_64 rng(7);
  auto schema = ss::random_schema(rng, "bench");
  std::vector<std::string> texts;
  for (int i = 0; i < 256; ++i) texts.push_back(ss::sql::render_sql(ss::random_query(schema, rng)));
  return {std::move(schema), std::move(texts)};
}

void BM_ParseSql(benchmark::State& state) {
  auto c = make_corpus();
  std::size_t i = 0, bytes = 0;
  for (auto _ : state) {
    const auto& t = c.texts[i++ % c.texts.size()];
    benchmark::DoNotOptimize(ss::sql::parse_sql(t, &c.schema));
    bytes += t.size();
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_ParseSql);

void BM_RenderSql(benchmark::State& state) {
  auto c = make_corpus();
  std::vector<ss::sql::Query> queries;
  for (const auto& t : c.texts) queries.push_back(ss::sql::parse_sql(t, &c.schema));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ss::sql::render_sql(queries[i++ % queries.size()]));
}
BENCHMARK(BM_RenderSql);

void BM_CompleteSql(benchmark::State& state) {
  auto c = make_corpus();
  auto graph = ss::SchemaGraph::build(c.schema);
  std::vector<ss::sql::Query> raw;
  for (const auto& t : c.texts) {
    auto q = ss::sql::parse_sql(t, &c.schema);
    q.from.joins.clear();
    raw.push_back(std::move(q));
  }
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(ss::complete_sql(raw[i++ % raw.size()], c.schema, graph));
}
BENCHMARK(BM_CompleteSql);

void BM_NameLink(benchmark::State& state) {
  std::mt19937_64 rng(3);
  auto schema = ss::random_schema(rng, "bench");
  auto q = ss::QuestionTokens::from_text(
      {"show the name and rank of every guest whose budget is above the average budget of all guests"});
  for (auto _ : state) benchmark::DoNotOptimize(ss::name_link(q, schema));
}
BENCHMARK(BM_NameLink);

}  // namespace
