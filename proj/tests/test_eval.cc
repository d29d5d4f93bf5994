#include <algorithm>
#include <random>

#include "doctest.h"
#include "structsql/error.h"
#include "structsql/eval.h"
#include "structsql/synthetic.h"
#include "test_util.h"

using namespace structsql;

namespace {

sql::Query reorder(sql::Query q, std::mt19937_64& rng) {
  std::shuffle(q.select.begin(), q.select.end(), rng);
  std::shuffle(q.group_by.begin(), q.group_by.end(), rng);
  if (q.where && q.where->kind != sql::Condition::Kind::Predicate)
    std::shuffle(q.where->children.begin(), q.where->children.end(), rng);
  for (auto& j : q.from.joins)
    if (rng() % 2) std::swap(j.left, j.right);
  return q;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("set match ignores order and masks values") {
    auto s = structsql::testing::tennis();
    auto gold = sql::parse_sql("SELECT Name, Country FROM Players WHERE Country = 'USA' AND Player_id > 3", &s);
    auto perm = sql::parse_sql("SELECT Country, Name FROM Players WHERE Player_id > 3 AND Country = 'USA'", &s);
    auto other_value = sql::parse_sql("SELECT Name, Country FROM Players WHERE Country = 'Spain' AND Player_id > 3", &s);
    auto other_col = sql::parse_sql("SELECT Name FROM Players WHERE Country = 'USA' AND Player_id > 3", &s);
    auto other_op = sql::parse_sql("SELECT Name, Country FROM Players WHERE Country = 'USA' OR Player_id > 3", &s);
    CHECK(exact_set_match(perm, gold, &s));
    CHECK(logical_form_match(perm, gold, &s));
    CHECK(exact_set_match(other_value, gold, &s));
    CHECK_FALSE(logical_form_match(other_value, gold, &s));
    CHECK_FALSE(exact_set_match(other_col, gold, &s));
    CHECK_FALSE(exact_set_match(other_op, gold, &s));
    auto n1 = sql::parse_sql("SELECT Name FROM Players WHERE Player_id = 3.0", &s);
    auto n2 = sql::parse_sql("SELECT Name FROM Players WHERE Player_id = 3", &s);
    CHECK(logical_form_match(n1, n2, &s));
  }

  TEST_CASE("reordered generated queries still match") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 10; ++k) {
      auto s = random_schema(rng, "db");
      for (int i = 0; i < 40; ++i) {
        auto q = random_query(s, rng);
        auto p = reorder(q, rng);
        CAPTURE(sql::render_sql(q));
        CHECK(exact_set_match(p, q, &s));
        CHECK(logical_form_match(p, q, &s));
      }
    }
  }

  TEST_CASE("corpus metrics on a hand-scored sample") {
    auto s = structsql::testing::tennis();
    auto resolver = [&](const std::string& id) { return id == "tennis" ? &s : nullptr; };
    std::vector<EvalExample> ex = {
        {"SELECT Name FROM Players", "SELECT Name FROM Players", "i1", "tennis"},                          // match
        {"SELECT Country FROM Players WHERE Country = 'x'", "SELECT Country FROM Players WHERE Country = 'y'",
         "i1", "tennis"},                                                                                    // match, not lx
        {"SELECT Name FROM Players", "SELECT Name FROM Players", "i2", "tennis"},                          // match
        {"SELECT Year FROM Ranking", "SELECT Points FROM Ranking", "i2", "tennis"},                         // mismatch
        {"SELECT Name FROM", "SELECT Name FROM Players", "i3", "tennis"},                                  // parse failure
        {"SELECT Nation FROM Players", "SELECT Name FROM Players", "i4", "tennis"},                        // schema violation
    };
    auto rep = score_corpus(ex, resolver, 2);
    CHECK(rep.total == 6);
    CHECK(rep.matched == 3);
    CHECK(rep.mismatches == 1);
    CHECK(rep.parse_failures == 1);
    CHECK(rep.schema_violations == 1);
    CHECK(rep.em == doctest::Approx(0.5));
    CHECK(rep.qm == doctest::Approx(0.5));
    CHECK(rep.lx == doctest::Approx(2.0 / 6.0));
    REQUIRE(rep.im);
    CHECK(*rep.im == doctest::Approx(0.25));
    CHECK(rep.interactions == 4);
    CHECK(rep.examples[4].verdict == Verdict::ParseFailure);
    CHECK(rep.examples[5].verdict == Verdict::SchemaViolation);
    auto j = rep.to_json();
    CHECK(j["examples"].size() == 6);
    CHECK(rep.to_json(false).count("examples") == 0);
    CHECK_FALSE(rep.summary().empty());

    auto serial = score_corpus(ex, resolver, 1);
    CHECK(serial.to_json() == j);
  }

  TEST_CASE("single-turn corpora have no interaction metric") {
    std::vector<EvalExample> ex = {{"SELECT a FROM t", "SELECT a FROM t", "1", ""},
                                   {"SELECT b FROM t", "SELECT a FROM t", "2", ""}};
    auto rep = score_corpus(ex, nullptr);
    CHECK_FALSE(rep.im);
    CHECK(rep.em == doctest::Approx(0.5));
  }

  TEST_CASE("interaction rate can exceed question rate when lengths differ") {
    std::vector<EvalExample> ex = {{"SELECT a FROM t", "SELECT a FROM t", "A", ""},
                                   {"SELECT b FROM t", "SELECT a FROM t", "B", ""},
                                   {"SELECT b FROM t", "SELECT a FROM t", "B", ""},
                                   {"SELECT b FROM t", "SELECT a FROM t", "B", ""}};
    auto rep = score_corpus(ex, nullptr);
    CHECK(rep.qm == doctest::Approx(0.25));
    REQUIRE(rep.im);
    CHECK(*rep.im == doctest::Approx(0.5));
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(score_corpus({}, nullptr), EmptyCorpus);
    std::vector<EvalExample> bad = {{"SELECT a FROM t", "SELEC a", "1", ""}};
    CHECK_THROWS_AS(score_corpus(bad, nullptr), MalformedDocument);
  }
}
