#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "structsql/constraints.h"
#include "structsql/vocabulary.h"

namespace structsql {

/// One scoring step. `candidates` is the allowed set; the scorer returns one
/// finite log-score per candidate, in the same order.
struct ScoringRequest {
  std::string_view example_id;
  std::span<const std::string> source;  // annotated input tokens
  std::span<const TokenId> prefix;
  std::span<const TokenId> candidates;
};

class TokenScorer {
 public:
  virtual ~TokenScorer() = default;
  virtual std::size_t vocab_size() const = 0;
  virtual TokenId eos_id() const = 0;
  virtual std::vector<double> score(const ScoringRequest& request) = 0;
};

/// Deterministic test double: 0 for the next target token (EOS once the
/// prefix has reached the target length), -1 for everything else.
class OracleScorer final : public TokenScorer {
 public:
  OracleScorer(std::vector<TokenId> target, std::size_t vocab_size, TokenId eos);
  std::size_t vocab_size() const override { return vocab_size_; }
  TokenId eos_id() const override { return eos_; }
  std::vector<double> score(const ScoringRequest& request) override;
  const std::vector<TokenId>& target() const { return target_; }

 private:
  std::vector<TokenId> target_;
  std::size_t vocab_size_;
  TokenId eos_;
};

/// Uniform scores in [-4, 0] derived from a hash of (seed, example, prefix,
/// candidate), so repeated calls agree.
class RandomScorer final : public TokenScorer {
 public:
  RandomScorer(std::uint64_t seed, std::size_t vocab_size, TokenId eos);
  std::size_t vocab_size() const override { return vocab_size_; }
  TokenId eos_id() const override { return eos_; }
  std::vector<double> score(const ScoringRequest& request) override;

 private:
  std::uint64_t seed_;
  std::size_t vocab_size_;
  TokenId eos_;
};

/// Scores by position against a list of preferred sequences: the token of
/// tier k at the current position scores -k, anything else scores
/// -(tiers). Used to push the decoder towards names that are not in the
/// schema.
class AdversarialScorer final : public TokenScorer {
 public:
  AdversarialScorer(std::vector<std::vector<TokenId>> tiers, std::size_t vocab_size, TokenId eos);
  std::size_t vocab_size() const override { return vocab_size_; }
  TokenId eos_id() const override { return eos_; }
  std::vector<double> score(const ScoringRequest& request) override;

 private:
  std::vector<std::vector<TokenId>> tiers_;
  std::size_t vocab_size_;
  TokenId eos_;
};

struct BeamOptions {
  int width = 5;
  int max_len = 200;
  bool length_normalize = false;  // rank by mean instead of sum of log-scores
};

struct Hypothesis {
  std::vector<TokenId> tokens;  // without EOS
  double score = 0.0;           // sum of log-scores, EOS included
  double rank_score = 0.0;      // score or score / (tokens + 1)
};

struct DecodeStats {
  std::size_t steps = 0;
  std::size_t scorer_calls = 0;
  std::size_t candidates_scored = 0;
};

struct BeamResult {
  std::vector<Hypothesis> hypotheses;  // best first
  DecodeStats stats;
  const Hypothesis& best() const { return hypotheses.front(); }
};

struct DecodeInput {
  std::string example_id;
  std::vector<std::string> source;
};

/// Beam search with per-step filtering by `constraints`. Equal rank scores
/// are broken by the lexicographic order of token ids. Throws
/// NoValidHypothesis when no hypothesis reaches EOS within max_len, and
/// ProtocolViolation when the scorer returns the wrong number of scores or a
/// non-finite score.
BeamResult beam_search(TokenScorer& scorer, const DecodeConstraints& constraints, const DecodeInput& input,
                       const BeamOptions& options = {});

/// Splits decoded SQL text into the identifier runs the constraints govern:
/// maximal runs of letters, digits, '_' and '.' that start with a letter,
/// plus a standalone '*', outside quoted literals.
std::vector<std::string> identifier_runs(std::string_view sql);

/// True when `run` is a SQL keyword or a complete path in the name trie.
bool run_in_schema(std::string_view run, const Vocabulary& vocab, const SchemaTrie& trie);

}  // namespace structsql
