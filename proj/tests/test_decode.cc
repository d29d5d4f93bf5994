#include <algorithm>
#include <random>
#include <optional>
#include <set>

#include "doctest.h"
#include "structsql/constraints.h"
#include "structsql/decode.h"
#include "structsql/error.h"
#include "structsql/prefix_trie.h"
#include "structsql/synthetic.h"
#include "test_util.h"

using namespace structsql;

namespace {

std::set<std::string> expected_names(const DatabaseSchema& s) {
  std::set<std::string> out = {"*"};
  for (const auto& t : s.tables()) {
    out.insert(t.name);
    out.insert(t.name + ".*");
  }
  for (auto c : s.all_columns()) out.insert(s.qualified_name(c));
  return out;
}

// Greedy decoding written out directly: best allowed token, lowest id on ties.
std::optional<std::vector<TokenId>> greedy(TokenScorer& scorer, const DecodeConstraints& dc, const DecodeInput& in,
                                           int max_len) {
  auto st = dc.initial();
  for (int step = 0; step < max_len; ++step) {
    auto cands = dc.allowed(st).materialize();
    ScoringRequest req{in.example_id, in.source, st.tokens, cands};
    auto scores = scorer.score(req);
    std::size_t best = 0;
    for (std::size_t i = 1; i < cands.size(); ++i)
      if (scores[i] > scores[best]) best = i;
    if (cands[best] == scorer.eos_id()) return st.tokens;
    dc.advance(st, cands[best], scores[best]);
  }
  return std::nullopt;
}

class WrongCountScorer final : public TokenScorer {
 public:
  explicit WrongCountScorer(const Vocabulary& v) : vocab_(v) {}
  std::size_t vocab_size() const override { return vocab_.size(); }
  TokenId eos_id() const override { return vocab_.eos_id(); }
  std::vector<double> score(const ScoringRequest& r) override { return std::vector<double>(r.candidates.size() + 1, 0.0); }

 private:
  const Vocabulary& vocab_;
};

class NanScorer final : public TokenScorer {
 public:
  explicit NanScorer(const Vocabulary& v) : vocab_(v) {}
  std::size_t vocab_size() const override { return vocab_.size(); }
  TokenId eos_id() const override { return vocab_.eos_id(); }
  std::vector<double> score(const ScoringRequest& r) override {
    return std::vector<double>(r.candidates.size(), std::numeric_limits<double>::quiet_NaN());
  }

 private:
  const Vocabulary& vocab_;
};

}  // namespace

TEST_SUITE("decode") {
  TEST_CASE("trie holds exactly the schema names") {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 30; ++k) {
      auto s = random_schema(rng, "db");
      std::vector<DatabaseSchema> one = {s};
      auto vocab = Vocabulary::build(one);
      auto trie = build_trie(s, vocab);
      std::set<std::string> got;
      for (const auto& p : trie.names.paths()) got.insert(vocab.decode(p));
      CHECK(got == expected_names(s));
      CHECK(trie.names.terminal_count() == got.size());
      for (const auto& name : got) CHECK(run_in_schema(name, vocab, trie));
      CHECK_FALSE(run_in_schema(s.table(0).name + "zz", vocab, trie));
      CHECK_FALSE(trie.values.has_value());
    }
  }

  TEST_CASE("children after Ranking.") {
    auto s = structsql::testing::tennis();
    std::vector<DatabaseSchema> one = {s};
    auto vocab = Vocabulary::build(one);
    auto trie = build_trie(s, vocab);
    PrefixTrie::NodeId node = PrefixTrie::kRoot;
    for (auto id : vocab.encode("Ranking.")) node = *trie.names.child(node, id);
    std::set<std::string> kids;
    for (auto id : trie.names.children(node)) kids.insert(vocab.surface(id));
    CHECK(kids == std::set<std::string>{"Player", "Year", "Points", "*"});
    CHECK_FALSE(trie.names.is_terminal(node));

    DecodeConstraints dc(vocab, trie);
    auto st = dc.initial();
    for (auto id : vocab.encode("SELECT Ranking.")) dc.advance(st, id, 0.0);
    auto allowed = dc.allowed(st).materialize();
    std::set<std::string> surf;
    for (auto id : allowed) surf.insert(vocab.surface(id));
    CHECK(surf == kids);
  }

  TEST_CASE("allowed-set view agrees with its materialization") {
    auto s = structsql::testing::tennis_with_content();
    std::vector<DatabaseSchema> one = {s};
    auto vocab = Vocabulary::build(one);
    for (bool value_mode : {false, true}) {
      auto trie = build_trie(s, vocab, value_mode);
      DecodeConstraints dc(vocab, trie);
      std::mt19937_64 rng(value_mode ? 2 : 1);
      auto st = dc.initial();
      int finished = 0;
      for (int step = 0; step < 10000; ++step) {
        auto view = dc.allowed(st);
        auto list = view.materialize();
        REQUIRE_FALSE(list.empty());
        REQUIRE(std::is_sorted(list.begin(), list.end()));
        for (TokenId id = 0; id < vocab.size(); ++id)
          REQUIRE(view.contains(id) == std::binary_search(list.begin(), list.end(), id));
        auto pick = list[rng() % list.size()];
        if (pick == vocab.eos_id() || st.tokens.size() > 40) {
          if (pick == vocab.eos_id()) {
            auto text = vocab.decode(st.tokens);
            CAPTURE(text);
            for (const auto& run : identifier_runs(text)) CHECK(run_in_schema(run, vocab, trie));
            ++finished;
          }
          st = dc.initial();
          continue;
        }
        dc.advance(st, pick, 0.0);
      }
      CHECK(finished > 50);
    }
  }

  TEST_CASE("width one equals greedy decoding") {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 10; ++k) {
      auto s = random_schema(rng, "db");
      std::vector<DatabaseSchema> one = {s};
      auto vocab = Vocabulary::build(one);
      auto trie = build_trie(s, vocab);
      DecodeConstraints dc(vocab, trie);
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RandomScorer scorer(seed * 31 + static_cast<std::uint64_t>(k), vocab.size(), vocab.eos_id());
        DecodeInput in{"ex" + std::to_string(seed), {"q"}};
        auto want = greedy(scorer, dc, in, 30);
        if (!want) {
          CHECK_THROWS_AS(beam_search(scorer, dc, in, {1, 30, false}), NoValidHypothesis);
        } else {
          CHECK(beam_search(scorer, dc, in, {1, 30, false}).best().tokens == *want);
        }
      }
    }
  }

  TEST_CASE("oracle scorer recovers every generated query") {
    std::mt19937_64 rng(99);
    int checked = 0;
    for (int k = 0; k < 15; ++k) {
      auto s = random_schema(rng, "db");
      std::vector<DatabaseSchema> one = {s};
      std::vector<std::string> texts;
      for (int i = 0; i < 10; ++i) texts.push_back(sql::render_sql(random_query(s, rng)));
      auto vocab = Vocabulary::build(one, texts);
      auto trie = build_trie(s, vocab);
      DecodeConstraints dc(vocab, trie);
      for (const auto& text : texts) {
        auto target = vocab.encode(text);
        OracleScorer scorer(target, vocab.size(), vocab.eos_id());
        auto result = beam_search(scorer, dc, {"x", {}}, {5, 1024, false});
        CAPTURE(text);
        CHECK(vocab.decode(result.best().tokens) == text);
        CHECK(result.best().score == 0.0);
        ++checked;
      }
    }
    CHECK(checked == 150);
  }

  TEST_CASE("constraints keep out names the schema lacks") {
    auto s = structsql::testing::quick_schema({{"Players", {"Player_id", "Citizenship"}}});
    std::vector<DatabaseSchema> one = {s};
    std::vector<std::string> extra = {"SELECT Players.Nation FROM Players"};
    auto vocab = Vocabulary::build(one, extra);
    auto trie = build_trie(s, vocab);
    auto bad = vocab.encode("SELECT Players.Nation FROM Players");
    auto good = vocab.encode("SELECT Players.Citizenship FROM Players");
    AdversarialScorer scorer({bad, good}, vocab.size(), vocab.eos_id());

    auto free = beam_search(scorer, DecodeConstraints(vocab, trie, false), {"a", {}}, {5, 50, false});
    CHECK(vocab.decode(free.best().tokens) == "SELECT Players.Nation FROM Players");
    auto held = beam_search(scorer, DecodeConstraints(vocab, trie, true), {"a", {}}, {5, 50, false});
    auto text = vocab.decode(held.best().tokens);
    CHECK(text == "SELECT Players.Citizenship FROM Players");
    for (const auto& h : held.hypotheses)
      for (const auto& run : identifier_runs(vocab.decode(h.tokens))) CHECK(run_in_schema(run, vocab, trie));
  }

  TEST_CASE("hypotheses are ranked and deterministic") {
    auto s = structsql::testing::tennis();
    std::vector<DatabaseSchema> one = {s};
    auto vocab = Vocabulary::build(one);
    auto trie = build_trie(s, vocab);
    DecodeConstraints dc(vocab, trie);
    std::vector<std::vector<TokenId>> tiers;
    for (const char* t : {"SELECT * FROM Players", "SELECT Players.Name FROM Players", "SELECT * FROM Ranking"})
      tiers.push_back(vocab.encode(t));
    AdversarialScorer scorer(tiers, vocab.size(), vocab.eos_id());
    auto a = beam_search(scorer, dc, {"e", {"x"}}, {4, 40, false});
    auto b = beam_search(scorer, dc, {"e", {"x"}}, {4, 40, false});
    CHECK(vocab.decode(a.best().tokens) == "SELECT * FROM Players");
    REQUIRE(a.hypotheses.size() == b.hypotheses.size());
    for (std::size_t i = 0; i < a.hypotheses.size(); ++i) CHECK(a.hypotheses[i].tokens == b.hypotheses[i].tokens);
    for (std::size_t i = 1; i < a.hypotheses.size(); ++i)
      CHECK(a.hypotheses[i - 1].rank_score >= a.hypotheses[i].rank_score);
    CHECK(a.stats.scorer_calls > 0);
  }

  TEST_CASE("failure modes") {
    auto s = structsql::testing::tennis();
    std::vector<DatabaseSchema> one = {s};
    auto vocab = Vocabulary::build(one);
    auto trie = build_trie(s, vocab);
    DecodeConstraints dc(vocab, trie);
    OracleScorer oracle(vocab.encode("SELECT * FROM Players"), vocab.size(), vocab.eos_id());
    CHECK_THROWS_AS(beam_search(oracle, dc, {"e", {}}, {1, 1, false}), NoValidHypothesis);
    WrongCountScorer wrong(vocab);
    CHECK_THROWS_AS(beam_search(wrong, dc, {"e", {}}), ProtocolViolation);
    NanScorer nan(vocab);
    CHECK_THROWS_AS(beam_search(nan, dc, {"e", {}}), ProtocolViolation);
    CHECK_THROWS_AS(vocab.encode("SELECT Unseen FROM Players"), Untokenizable);
  }

  TEST_CASE("identifier runs") {
    CHECK(identifier_runs("SELECT T.a, 'x y' FROM T WHERE b > 1.5") ==
          std::vector<std::string>{"SELECT", "T.a", "FROM", "T", "WHERE", "b"});
    CHECK(identifier_runs("SELECT COUNT(*), T.* FROM T") ==
          std::vector<std::string>{"SELECT", "COUNT", "*", "T.*", "FROM", "T"});
  }
}
