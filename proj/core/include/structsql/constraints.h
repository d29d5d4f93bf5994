#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "structsql/prefix_trie.h"
#include "structsql/vocabulary.h"

namespace structsql {

/// Where the decoder currently is with respect to the schema trie.
struct Cursor {
  enum class Kind : std::uint8_t {
    Inactive,  // between identifiers
    Name,      // inside a schema name; `node` is in the name trie
    Literal,   // inside a quoted string, unconstrained
    Value,     // inside a quoted string constrained by the value trie
  };
  Kind kind = Kind::Inactive;
  PrefixTrie::NodeId node = PrefixTrie::kRoot;
  bool operator==(const Cursor&) const = default;
};

/// Class of the most recent token, used to stop two word tokens from fusing
/// into one identifier ("Players" followed by "FROM" would read "PlayersFROM").
enum class PrevClass : std::uint8_t { None, Word, Digit, Dot, Other };

struct DecodeState {
  std::vector<TokenId> tokens;  // without EOS
  Cursor cursor;
  PrevClass prev = PrevClass::None;
  double score = 0.0;  // sum of log-probabilities
  bool finished = false;
};

/// Allowed-token view returned by DecodeConstraints::allowed. It references
/// precomputed sorted lists and never copies, so building it costs the same
/// for any schema size.
class AllowedSet {
 public:
  AllowedSet() = default;
  AllowedSet(std::span<const TokenId> children, std::span<const TokenId> base, bool eos, TokenId eos_id)
      : children_(children), base_(base), eos_(eos), eos_id_(eos_id) {}

  bool contains(TokenId id) const;
  /// Sorted, deduplicated ids (EOS included when allowed).
  std::vector<TokenId> materialize() const;
  std::span<const TokenId> trie_children() const { return children_; }
  std::span<const TokenId> base() const { return base_; }
  bool allows_eos() const { return eos_; }
  bool empty() const { return children_.empty() && base_.empty() && !eos_; }

 private:
  std::span<const TokenId> children_;
  std::span<const TokenId> base_;
  bool eos_ = false;
  TokenId eos_id_ = 0;
};

/// Lexicon-mode constraint: identifier runs must follow the schema trie;
/// outside them only SQL keywords, symbols, numbers and quoted literals are
/// admitted. No grammar is enforced.
class DecodeConstraints {
 public:
  DecodeConstraints(const Vocabulary& vocab, const SchemaTrie& trie, bool enabled = true);

  DecodeState initial() const { return {}; }
  AllowedSet allowed(const DecodeState& state) const;
  /// Appends `token` and updates the cursor. Does not check membership.
  void advance(DecodeState& state, TokenId token, double log_prob) const;

  bool enabled() const { return enabled_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const SchemaTrie& trie() const { return trie_; }

  /// Keyword words and keyword symbols (space, parentheses, operators).
  std::span<const TokenId> keyword_ids() const { return keywords_all_; }

 private:
  void step_inactive(DecodeState& state, TokenId token) const;
  PrevClass prev_class(TokenId token) const;

  const Vocabulary& vocab_;
  const SchemaTrie& trie_;
  bool enabled_;
  TokenId quote_ = 0;
  TokenId dot_ = 0;

  std::vector<TokenId> keywords_all_;
  std::vector<TokenId> after_other_;  // keywords + digits + "'" (root children come from the trie)
  std::vector<TokenId> after_word_;   // keyword symbols + "'"
  std::vector<TokenId> after_digit_;  // keyword symbols + digits + "."
  std::vector<TokenId> after_dot_;    // digits
  std::vector<TokenId> after_name_;   // keyword symbols
  std::vector<TokenId> in_literal_;   // everything except EOS
  std::vector<TokenId> quote_only_;
};

/// allowed_tokens as a free function over the constraint object.
inline AllowedSet allowed_tokens(const DecodeState& state, const DecodeConstraints& constraints) {
  return constraints.allowed(state);
}

}  // namespace structsql
