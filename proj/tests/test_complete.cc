#include <algorithm>
#include <random>

#include "doctest.h"
#include "structsql/complete.h"
#include "structsql/error.h"
#include "structsql/schema_graph.h"
#include "structsql/sql_ast.h"
#include "structsql/synthetic.h"
#include "test_util.h"

using namespace structsql;
using structsql::testing::QuickFk;
using structsql::testing::quick_schema;

namespace {

bool mask_connected(const SchemaGraph& g, unsigned mask) {
  if (mask == 0) return false;
  int start = __builtin_ctz(mask);
  unsigned seen = 1u << start;
  std::vector<int> stack = {start};
  while (!stack.empty()) {
    int t = stack.back();
    stack.pop_back();
    for (int n : g.table_neighbors(t)) {
      unsigned bit = 1u << n;
      if ((mask & bit) && !(seen & bit)) seen |= bit, stack.push_back(n);
    }
  }
  return seen == mask;
}

std::vector<int> mask_tables(unsigned mask) {
  std::vector<int> out;
  for (int i = 0; i < 32; ++i)
    if (mask & (1u << i)) out.push_back(i);
  return out;
}

// Exhaustive reference: fewest tables, then lexicographically least added set.
std::optional<std::vector<int>> brute_connector(const SchemaGraph& g, unsigned terminals) {
  const unsigned n = static_cast<unsigned>(g.table_count());
  std::optional<std::vector<int>> best_added;
  std::optional<std::vector<int>> best;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    if ((mask & terminals) != terminals || !mask_connected(g, mask)) continue;
    auto added = mask_tables(mask & ~terminals);
    if (!best || mask_tables(mask).size() < best->size() ||
        (mask_tables(mask).size() == best->size() && added < *best_added)) {
      best = mask_tables(mask);
      best_added = added;
    }
  }
  return best;
}

DatabaseSchema random_graph_schema(std::mt19937_64& rng, int tables, int extra_edges) {
  std::vector<std::pair<std::string, std::vector<std::string>>> defs;
  for (int t = 0; t < tables; ++t) {
    std::string name = "T" + std::to_string(t);
    defs.push_back({name, {name + "_id", "ref_a", "ref_b", "ref_c"}});
  }
  std::vector<QuickFk> fks;
  std::vector<int> used(static_cast<std::size_t>(tables), 1);
  auto add = [&](int child, int parent) {
    if (used[static_cast<std::size_t>(child)] > 3) return;
    fks.push_back({child, used[static_cast<std::size_t>(child)]++, parent, 0});
  };
  // Random forest: some tables stay in separate components.
  for (int t = 1; t < tables; ++t)
    if (rng() % 5 != 0) add(t, static_cast<int>(rng() % static_cast<unsigned>(t)));
  for (int e = 0; e < extra_edges; ++e) {
    int a = static_cast<int>(rng() % static_cast<unsigned>(tables)), b = static_cast<int>(rng() % static_cast<unsigned>(tables));
    if (a != b) add(a, b);
  }
  return quick_schema(defs, fks, "g");
}

}  // namespace

TEST_SUITE("complete") {
  TEST_CASE("missing bridge table is added with its join keys") {
    auto s = structsql::testing::tennis();
    auto g = SchemaGraph::build(s);
    auto q = sql::parse_sql("SELECT Players.Name FROM Players JOIN Ranking WHERE Ranking.Year = 2016", &s);
    auto c = complete_sql(q, s, g);
    CHECK(sql::render_sql(c.query) ==
          "SELECT Players.Name FROM Players JOIN Matches ON Matches.Winner_id = Players.Player_id "
          "JOIN Ranking ON Ranking.Player_id = Matches.Winner_id WHERE Ranking.Year = 2016");
    CHECK(c.plan.added_tables == std::vector<std::string>{"Matches"});
    CHECK(c.plan.added_columns == std::vector<std::string>{"Matches.Winner_id"});
    CHECK(c.plan.join_conditions.size() == 2);
    CHECK_FALSE(c.plan.rationale.empty());
  }

  TEST_CASE("tables mentioned only through columns are joined in") {
    auto s = quick_schema({{"A", {"A_id"}}, {"B", {"B_id", "a"}}, {"C", {"C_id", "b", "name"}}},
                          {{1, 1, 0, 0}, {2, 1, 1, 0}});
    auto g = SchemaGraph::build(s);
    auto q = sql::parse_sql("SELECT C.name FROM A WHERE A.A_id = 3", &s);
    auto c = complete_sql(q, s, g);
    CHECK(sql::render_sql(c.query) ==
          "SELECT C.name FROM A JOIN B ON B.a = A.A_id JOIN C ON C.b = B.B_id WHERE A.A_id = 3");
    CHECK(c.plan.added_tables == std::vector<std::string>{"B", "C"});
  }

  TEST_CASE("already connected queries are untouched") {
    auto s = structsql::testing::tennis();
    auto g = SchemaGraph::build(s);
    for (const char* text : {"SELECT * FROM Players",
                             "SELECT Players.Name FROM Players JOIN Matches ON Players.Player_id = Matches.Winner_id",
                             "SELECT Ranking.Year FROM Ranking UNION SELECT Matches.Year FROM Matches"}) {
      auto q = sql::parse_sql(text, &s);
      auto c = complete_sql(q, s, g);
      CHECK(c.plan.empty());
      CHECK(c.query == q);
    }
  }

  TEST_CASE("disconnected terminals") {
    auto s = quick_schema({{"A", {"A_id"}}, {"B", {"B_id"}}});
    auto g = SchemaGraph::build(s);
    CHECK_THROWS_AS(connect_terminals(g, {0, 1}), Disconnected);
    CHECK_THROWS_AS(complete_sql(sql::parse_sql("SELECT A.A_id FROM A JOIN B", &s), s, g), Disconnected);
  }

  TEST_CASE("exact connector agrees with exhaustive search") {
    std::mt19937_64 rng(41);
    int compared = 0;
    for (int round = 0; round < 300; ++round) {
      int n = 2 + static_cast<int>(rng() % 9);
      auto s = random_graph_schema(rng, n, static_cast<int>(rng() % 4));
      auto g = SchemaGraph::build(s);
      unsigned terms = 0;
      while (terms == 0) terms = static_cast<unsigned>(rng() % (1u << n));
      auto ref = brute_connector(g, terms);
      CAPTURE(terms);
      if (!ref) {
        CHECK_THROWS_AS(connect_terminals(g, mask_tables(terms), ConnectorMode::Exact), Disconnected);
        CHECK_THROWS_AS(connect_terminals(g, mask_tables(terms), ConnectorMode::Greedy), Disconnected);
        continue;
      }
      CHECK(connect_terminals(g, mask_tables(terms), ConnectorMode::Exact) == *ref);
      auto greedy = connect_terminals(g, mask_tables(terms), ConnectorMode::Greedy);
      unsigned gm = 0;
      for (int t : greedy) gm |= 1u << t;
      CHECK((gm & terms) == terms);
      CHECK(mask_connected(g, gm));
      CHECK(greedy.size() >= ref->size());
      ++compared;
    }
    CHECK(compared > 100);
  }

  TEST_CASE("completion is idempotent and leaves every block connected") {
    std::mt19937_64 rng(77);
    for (int k = 0; k < 20; ++k) {
      auto s = random_schema(rng, "db");
      auto g = SchemaGraph::build(s);
      for (int i = 0; i < 30; ++i) {
        auto gold = random_query(s, rng);
        // Drop the ON clauses and one FROM table to simulate a raw prediction.
        auto raw = gold;
        raw.from.joins.clear();
        if (raw.from.tables.size() > 1) raw.from.tables.erase(raw.from.tables.begin() + 1);
        auto once = complete_sql(raw, s, g);
        auto twice = complete_sql(once.query, s, g);
        CAPTURE(sql::render_sql(raw));
        CHECK(twice.plan.empty());
        CHECK(twice.query == once.query);
        CHECK(sql::render_sql(sql::parse_sql(sql::render_sql(once.query), &s)) == sql::render_sql(once.query));
        CHECK(complete_sql(gold, s, g).plan.empty());
      }
    }
  }
}
