#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "structsql/annotate.h"
#include "structsql/error.h"
#include "structsql/text.h"
#include "test_util.h"

using namespace structsql;

namespace {

std::string segment_text(const AnnotatedInput& in, Segment kind) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < in.size(); ++i)
    if (in.segments[i].kind == kind) out.push_back(in.tokens[i]);
  return text::join(out, " ");
}

}  // namespace

TEST_SUITE("annotate") {
  TEST_CASE("golden serialization for the tennis schema") {
    auto s = structsql::testing::tennis();
    auto q = QuestionTokens::from_text({"Which Player won"});
    auto links = name_link(q, s);
    auto in = build_input(q, s, links, nullptr);
    CHECK(in.render() ==
          "Which Player won [TABLE] Exact-Match Players Matches Ranking [COLUMN] "
          "Partial-Match & Primary-Key & Integer Players.Player_id Text Players.Name Text Players.Country "
          "Integer Matches.Id Primary-Key & Integer Matches.Winner_id Integer Matches.Year "
          "Text Matches.Tourney_name Partial-Match & Primary-Key & Integer Ranking.Player_id "
          "Integer Ranking.Year Integer Ranking.Points "
          "Players links to Matches Matches links to Ranking");
    CHECK(in.segments.size() == in.tokens.size());
  }

  TEST_CASE("plain layout when every mark family is off") {
    auto s = structsql::testing::tennis();
    auto q = QuestionTokens::from_text({"Which Player won"});
    auto in = build_input(q, s, name_link(q, s), nullptr, MarkOptions::none());
    CHECK(in.render() ==
          "Which Player won [TABLE] Players Matches Ranking [COLUMN] Players.Player_id Players.Name "
          "Players.Country Matches.Id Matches.Winner_id Matches.Year Matches.Tourney_name "
          "Ranking.Player_id Ranking.Year Ranking.Points");
  }

  TEST_CASE("values follow their column") {
    auto s = structsql::testing::tennis_with_content();
    auto q = QuestionTokens::from_text({"ranking points in 2016"});
    auto links = name_link(q, s);
    auto values = value_link(q, s);
    links.insert(links.end(), values.begin(), values.end());
    MarkOptions opts;
    opts.include_values = true;
    auto in = build_input(q, s, links, nullptr, opts);
    auto r = in.render();
    CHECK(r.find("Exact-Match & Value-Match & Integer Ranking.Year & 2016") == std::string::npos);
    CHECK(r.find("Value-Match & Integer Ranking.Year & 2016") != std::string::npos);
    CHECK(r.find("Exact-Match & Integer Ranking.Points") != std::string::npos);
    CHECK(segment_text(in, Segment::Value) == "2016 2016");
  }

  TEST_CASE("turns are newest first with separators") {
    auto s = structsql::testing::tennis();
    auto q = QuestionTokens::from_text({"first one", "second one", "third"});
    auto in = build_input(q, s, {}, nullptr);
    CHECK(in.render().starts_with("third | second one | first one [TABLE]"));
    CHECK(in.segments[0] == SegmentTag{Segment::QuestionTurn, 2});
    CHECK(in.segments[1].kind == Segment::TurnSeparator);
    CHECK(in.segments[2] == SegmentTag{Segment::QuestionTurn, 1});
  }

  TEST_CASE("previous SQL is the canonical rendering") {
    auto s = structsql::testing::tennis();
    auto prev = sql::parse_sql("select name from players where country = 'USA'", &s);
    auto q = QuestionTokens::from_text({"and Spain", "players from USA"});
    auto in = build_input(q, s, {}, &prev);
    CHECK(segment_text(in, Segment::PrevSql) == sql::render_sql(prev));
    MarkOptions off;
    off.discourse = false;
    CHECK(segment_text(build_input(q, s, {}, &prev, off), Segment::PrevSql).empty());
  }

  TEST_CASE("invalid link targets are rejected") {
    auto s = structsql::testing::tennis();
    std::vector<LinkAnnotation> bad = {{0, 0, 1, SchemaItem::of_table(9), MatchKind::ExactMatch, std::nullopt}};
    CHECK_THROWS_AS(linearize_schema(s, bad, false), UnknownLinkTarget);
    bad[0].target = SchemaItem::of_column({0, 7});
    CHECK_THROWS_AS(linearize_schema(s, bad, false), UnknownLinkTarget);
    bad[0] = {0, 0, 1, SchemaItem::of_table(0), MatchKind::ValueMatch, std::string("x")};
    CHECK_THROWS_AS(linearize_schema(s, bad, true), UnknownLinkTarget);
  }

  TEST_CASE("different mark assignments serialize differently") {
    auto s = structsql::testing::tennis();
    std::vector<SchemaItem> items;
    for (int t = 0; t < 3; ++t) items.push_back(SchemaItem::of_table(t));
    for (auto c : s.all_columns()) items.push_back(SchemaItem::of_column(c));
    const std::vector<std::string> pool = {"2016", "usa", "new york", "a"};

    // Effective marks per item: strongest name match and the set of values.
    using Summary = std::map<SchemaItem, std::pair<int, std::set<std::string>>>;
    std::map<std::string, Summary> seen;
    std::mt19937_64 rng(5);
    for (int round = 0; round < 2000; ++round) {
      std::vector<LinkAnnotation> links;
      Summary summary;
      std::size_t n = rng() % 6;
      for (std::size_t i = 0; i < n; ++i) {
        auto item = items[rng() % items.size()];
        auto roll = rng() % 3;
        if (roll == 2 && !item.is_table()) {
          auto v = pool[rng() % pool.size()];
          links.push_back({0, 0, 1, item, MatchKind::ValueMatch, v});
          summary[item].second.insert(v);
        } else if (roll < 2) {
          auto kind = roll == 0 ? MatchKind::ExactMatch : MatchKind::PartialMatch;
          links.push_back({0, 0, 1, item, kind, std::nullopt});
          int& best = summary[item].first;
          best = std::max(best, roll == 0 ? 2 : 1);
        }
      }
      for (auto it = summary.begin(); it != summary.end();)
        it = it->second.first == 0 && it->second.second.empty() ? summary.erase(it) : std::next(it);
      auto in = linearize_schema(s, links, true);
      for (const auto& tok : in.tokens) REQUIRE(tok.find(' ') == std::string::npos);
      // Value order depends on link order, so compare against the summary only.
      auto [pos, fresh] = seen.emplace(in.render(), summary);
      if (!fresh) CHECK(pos->second == summary);
    }
    CHECK(seen.size() > 100);
  }

  TEST_CASE("qualified column names never collide across tables") {
    auto s = structsql::testing::tennis();
    auto in = linearize_schema(s, {}, false, false);
    std::set<std::string> cols;
    for (std::size_t i = 0; i < in.size(); ++i)
      if (in.segments[i].kind == Segment::Column) CHECK(cols.insert(in.tokens[i]).second);
    CHECK(cols.size() == s.column_count());
  }

  TEST_CASE("marks vocabulary is closed") {
    auto s = structsql::testing::tennis_with_content();
    auto q = QuestionTokens::from_text({"player ranking year 2016 usa"});
    auto links = name_link(q, s);
    auto values = value_link(q, s);
    links.insert(links.end(), values.begin(), values.end());
    MarkOptions opts;
    opts.include_values = true;
    auto in = build_input(q, s, links, nullptr, opts);
    for (std::size_t i = 0; i < in.size(); ++i)
      if (in.segments[i].kind == Segment::Mark) CHECK(is_mark_token(in.tokens[i]));
  }
}
