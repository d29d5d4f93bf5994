#include "structsql/decode.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "structsql/error.h"

namespace structsql {

OracleScorer::OracleScorer(std::vector<TokenId> target, std::size_t vocab_size, TokenId eos)
    : target_(std::move(target)), vocab_size_(vocab_size), eos_(eos) {}

std::vector<double> OracleScorer::score(const ScoringRequest& request) {
  TokenId want = request.prefix.size() < target_.size() ? target_[request.prefix.size()] : eos_;
  std::vector<double> out(request.candidates.size(), -1.0);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (request.candidates[i] == want) out[i] = 0.0;
  return out;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RandomScorer::RandomScorer(std::uint64_t seed, std::size_t vocab_size, TokenId eos)
    : seed_(seed), vocab_size_(vocab_size), eos_(eos) {}

std::vector<double> RandomScorer::score(const ScoringRequest& request) {
  std::uint64_t h = mix(seed_);
  for (char c : request.example_id) h = mix(h ^ static_cast<unsigned char>(c));
  for (TokenId t : request.prefix) h = mix(h ^ t);
  std::vector<double> out;
  out.reserve(request.candidates.size());
  for (TokenId c : request.candidates) {
    std::uint64_t v = mix(h ^ (std::uint64_t{c} << 32));
    out.push_back(-4.0 * static_cast<double>(v >> 11) / static_cast<double>(1ULL << 53));
  }
  return out;
}

AdversarialScorer::AdversarialScorer(std::vector<std::vector<TokenId>> tiers, std::size_t vocab_size, TokenId eos)
    : tiers_(std::move(tiers)), vocab_size_(vocab_size), eos_(eos) {}

std::vector<double> AdversarialScorer::score(const ScoringRequest& request) {
  const std::size_t pos = request.prefix.size();
  const double floor = -static_cast<double>(tiers_.size());
  std::vector<double> out(request.candidates.size(), floor);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t k = 0; k < tiers_.size(); ++k) {
      TokenId want = pos < tiers_[k].size() ? tiers_[k][pos] : eos_;
      if (request.candidates[i] == want) {
        out[i] = -static_cast<double>(k);
        break;
      }
    }
  }
  return out;
}

namespace {

struct Candidate {
  double rank;
  double score;
  std::size_t parent;
  TokenId token;
};

double rank_of(double score, std::size_t length, bool normalize) {
  return normalize ? score / static_cast<double>(length + 1) : score;
}

bool lex_less(const std::vector<TokenId>& a, const std::vector<TokenId>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

BeamResult beam_search(TokenScorer& scorer, const DecodeConstraints& constraints, const DecodeInput& input,
                       const BeamOptions& options) {
  if (options.width < 1 || options.max_len < 1) throw ConfigError("beam width and max_len must be at least 1");
  const TokenId eos = constraints.vocabulary().eos_id();
  const auto width = static_cast<std::size_t>(options.width);

  BeamResult result;
  std::vector<DecodeState> live{constraints.initial()};
  std::vector<Hypothesis> finished;
  bool nonpositive = true;

  // Candidate order: higher rank first, then the lexicographically smaller
  // extended sequence.
  auto better = [&](const Candidate& a, const Candidate& b) {
    if (a.rank != b.rank) return a.rank > b.rank;
    const auto& ta = live[a.parent].tokens;
    const auto& tb = live[b.parent].tokens;
    if (a.parent != b.parent) {
      auto [ia, ib] = std::mismatch(ta.begin(), ta.end(), tb.begin(), tb.end());
      if (ia != ta.end() && ib != tb.end()) return *ia < *ib;
      // One parent is a prefix of the other; compare the next element.
      TokenId na = ia == ta.end() ? a.token : *ia;
      TokenId nb = ib == tb.end() ? b.token : *ib;
      if (na != nb) return na < nb;
      return ta.size() < tb.size();
    }
    return a.token < b.token;
  };

  for (int step = 0; step < options.max_len && !live.empty(); ++step) {
    ++result.stats.steps;
    std::vector<Candidate> pool;
    for (std::size_t b = 0; b < live.size(); ++b) {
      const auto& state = live[b];
      auto allowed = constraints.allowed(state).materialize();
      if (allowed.empty()) continue;
      auto scores = scorer.score({input.example_id, input.source, state.tokens, allowed});
      ++result.stats.scorer_calls;
      result.stats.candidates_scored += allowed.size();
      if (scores.size() != allowed.size())
        throw ProtocolViolation("scorer returned " + std::to_string(scores.size()) + " scores for " +
                                std::to_string(allowed.size()) + " candidates");
      for (std::size_t i = 0; i < allowed.size(); ++i) {
        if (!std::isfinite(scores[i])) throw ProtocolViolation("scorer returned a non-finite score");
        if (scores[i] > 0) nonpositive = false;
        double total = state.score + scores[i];
        std::size_t len = state.tokens.size() + (allowed[i] == eos ? 0 : 1);
        pool.push_back({rank_of(total, len, options.length_normalize), total, b, allowed[i]});
      }
    }
    if (pool.empty()) break;
    std::size_t keep = std::min(width, pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep), pool.end(), better);

    std::vector<DecodeState> next;
    for (std::size_t i = 0; i < keep; ++i) {
      const auto& c = pool[i];
      if (c.token == eos) {
        finished.push_back({live[c.parent].tokens, c.score, c.rank});
      } else {
        DecodeState s = live[c.parent];
        constraints.advance(s, c.token, c.score - s.score);
        s.score = c.score;
        next.push_back(std::move(s));
      }
    }
    live = std::move(next);

    if (finished.size() >= width && !options.length_normalize && nonpositive) {
      // Scores only decrease from here: once `width` finished hypotheses
      // score at least as well as the best live one, the ranking is settled.
      double best_live = -INFINITY;
      for (const auto& s : live) best_live = std::max(best_live, s.score);
      std::size_t settled = 0;
      for (const auto& h : finished)
        if (h.score >= best_live) ++settled;
      if (settled >= width) break;
    }
  }

  if (finished.empty()) throw NoValidHypothesis("no hypothesis reached end of sequence within " +
                                                std::to_string(options.max_len) + " tokens");
  std::stable_sort(finished.begin(), finished.end(), [](const Hypothesis& a, const Hypothesis& b) {
    if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
    return lex_less(a.tokens, b.tokens);
  });
  if (finished.size() > width) finished.resize(width);
  result.hypotheses = std::move(finished);
  return result;
}

std::vector<std::string> identifier_runs(std::string_view sql) {
  std::vector<std::string> out;
  bool in_literal = false;
  std::size_t i = 0;
  auto is_ident = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
           static_cast<unsigned char>(c) >= 0x80;
  };
  while (i < sql.size()) {
    char c = sql[i];
    if (c == '\'') {
      in_literal = !in_literal;
      ++i;
      continue;
    }
    if (in_literal) {
      ++i;
      continue;
    }
    if (c == '*') {
      bool qualified_star = i > 0 && sql[i - 1] == '.';
      if (!qualified_star) out.emplace_back("*");
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || static_cast<unsigned char>(c) >= 0x80) {
      std::size_t j = i;
      while (j < sql.size() && is_ident(sql[j])) ++j;
      if (j < sql.size() && sql[j] == '*' && sql[j - 1] == '.') ++j;  // "T.*"
      out.emplace_back(sql.substr(i, j - i));
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      // Numbers, including any letters glued to them, form one run.
      std::size_t j = i;
      while (j < sql.size() && is_ident(sql[j])) ++j;
      std::string run(sql.substr(i, j - i));
      bool numeric = std::all_of(run.begin(), run.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) || ch == '.'; });
      if (!numeric) out.push_back(run);
      i = j;
      continue;
    }
    ++i;
  }
  return out;
}

bool run_in_schema(std::string_view run, const Vocabulary& vocab, const SchemaTrie& trie) {
  if (auto id = vocab.find(run); id && vocab.is_keyword(*id)) return true;
  auto pieces = split_pieces(run);
  PrefixTrie::NodeId node = PrefixTrie::kRoot;
  for (const auto& p : pieces) {
    auto id = vocab.find(p);
    if (!id) return false;
    auto next = trie.names.child(node, *id);
    if (!next) return false;
    node = *next;
  }
  return !pieces.empty() && trie.names.is_terminal(node);
}

}  // namespace structsql
