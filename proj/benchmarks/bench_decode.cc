#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "structsql/constraints.h"
#include "structsql/decode.h"
#include "structsql/prefix_trie.h"
#include "structsql/sql_ast.h"
#include "structsql/synthetic.h"

namespace ss = structsql;

namespace {

ss::DatabaseSchema grid_schema(std::size_t tables, std::size_t columns) {
  std::vector<ss::TableDef> defs;
  for (std::size_t t = 0; t < tables; ++t) {
    ss::TableDef def;
    def.name = "T" + std::to_string(t);
    for (std::size_t c = 0; c < columns; ++c)
      def.columns.push_back({"c" + std::to_string(c), ss::ColumnType::Integer, "number", c == 0, {}, {}});
    def.primary_key = 0;
    defs.push_back(std::move(def));
  }
  return ss::DatabaseSchema::build("grid", std::move(defs), {});
}

// allowed_tokens over a fixed set of decoder states; args are tables and
// columns per table.
void BM_AllowedTokens(benchmark::State& state) {
  auto schema = grid_schema(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  std::vector<ss::DatabaseSchema> one = {schema};
  auto vocab = ss::Vocabulary::build(one);
  auto trie = ss::build_trie(schema, vocab);
  ss::DecodeConstraints dc(vocab, trie);
  std::vector<ss::DecodeState> states;
  for (const char* prefix : {"", "SELECT ", "SELECT T1.", "SELECT T1.c1", "SELECT T1.c1 FROM T1 WHERE T1.c0 = 4"}) {
    auto st = dc.initial();
    if (*prefix)
      for (auto id : vocab.encode(prefix)) dc.advance(st, id, 0.0);
    states.push_back(std::move(st));
  }
  std::size_t i = 0;
  for (auto _ : state) {
    auto set = ss::allowed_tokens(states[i++ % states.size()], dc);
    benchmark::DoNotOptimize(set);
  }
  state.counters["columns"] = static_cast<double>(schema.column_count());
}
BENCHMARK(BM_AllowedTokens)->Args({2, 5})->Args({10, 100})->Args({100, 100});

void BM_TrieBuild(benchmark::State& state) {
  auto schema = grid_schema(static_cast<std::size_t>(state.range(0)), 100);
  std::vector<ss::DatabaseSchema> one = {schema};
  auto vocab = ss::Vocabulary::build(one);
  for (auto _ : state) benchmark::DoNotOptimize(ss::build_trie(schema, vocab));
}
BENCHMARK(BM_TrieBuild)->Arg(1)->Arg(10)->Arg(100);

// Oracle-scored beam search over generated queries.
void BM_BeamSearchOracle(benchmark::State& state) {
  std::mt19937_64 rng(1);
  auto schema = ss::random_schema(rng, "bench");
  std::vector<std::string> texts;
  for (int i = 0; i < 32; ++i) texts.push_back(ss::sql::render_sql(ss::random_query(schema, rng)));
  std::vector<ss::DatabaseSchema> one = {schema};
  auto vocab = ss::Vocabulary::build(one, texts);
  auto trie = ss::build_trie(schema, vocab);
  ss::DecodeConstraints dc(vocab, trie, state.range(1) != 0);
  std::vector<std::vector<ss::TokenId>> targets;
  for (const auto& t : texts) targets.push_back(vocab.encode(t));
  ss::BeamOptions opts{static_cast<int>(state.range(0)), 512, false};
  std::size_t i = 0, tokens = 0;
  for (auto _ : state) {
    const auto& target = targets[i++ % targets.size()];
    ss::OracleScorer scorer(target, vocab.size(), vocab.eos_id());
    auto res = ss::beam_search(scorer, dc, {"b", {}}, opts);
    tokens += target.size();
    benchmark::DoNotOptimize(res);
  }
  state.counters["tokens/s"] = benchmark::Counter(static_cast<double>(tokens), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_BeamSearchOracle)->Args({1, 1})->Args({5, 1})->Args({5, 0})->Unit(benchmark::kMillisecond);

}  // namespace
