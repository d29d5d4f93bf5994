#include "structsql/constraints.h"

#include <algorithm>
#include <string_view>

namespace structsql {

bool AllowedSet::contains(TokenId id) const {
  if (eos_ && id == eos_id_) return true;
  return std::binary_search(children_.begin(), children_.end(), id) ||
         std::binary_search(base_.begin(), base_.end(), id);
}

std::vector<TokenId> AllowedSet::materialize() const {
  std::vector<TokenId> out;
  out.reserve(children_.size() + base_.size() + 1);
  std::set_union(children_.begin(), children_.end(), base_.begin(), base_.end(), std::back_inserter(out));
  if (eos_ && !std::binary_search(out.begin(), out.end(), eos_id_))
    out.insert(std::lower_bound(out.begin(), out.end(), eos_id_), eos_id_);
  return out;
}

DecodeConstraints::DecodeConstraints(const Vocabulary& vocab, const SchemaTrie& trie, bool enabled)
    : vocab_(vocab), trie_(trie), enabled_(enabled) {
  constexpr std::string_view kKeywordSymbols = " (),=!<>+-*/";
  quote_ = vocab.find("'").value_or(vocab.eos_id());
  dot_ = vocab.find(".").value_or(vocab.eos_id());
  std::vector<TokenId> keyword_symbols, digits;
  for (TokenId id = 0; id < vocab.size(); ++id) {
    const auto& s = vocab.surface(id);
    if (id != vocab.eos_id()) in_literal_.push_back(id);
    if (vocab.is_keyword(id)) keywords_all_.push_back(id);
    if (s.size() == 1 && kKeywordSymbols.find(s[0]) != std::string_view::npos) {
      keyword_symbols.push_back(id);
      keywords_all_.push_back(id);
    }
    if (vocab.token_class(id) == TokenClass::Digit) digits.push_back(id);
  }
  auto merge = [](std::initializer_list<const std::vector<TokenId>*> parts) {
    std::vector<TokenId> out;
    for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  keywords_all_ = merge({&keywords_all_});
  std::vector<TokenId> quote{quote_}, dot{dot_};
  after_other_ = merge({&keywords_all_, &digits, &quote});
  after_word_ = merge({&keyword_symbols, &quote});
  after_digit_ = merge({&keyword_symbols, &digits, &dot});
  after_dot_ = merge({&digits});
  after_name_ = merge({&keyword_symbols});
  quote_only_ = {quote_};
}

AllowedSet DecodeConstraints::allowed(const DecodeState& state) const {
  const TokenId eos = vocab_.eos_id();
  if (!enabled_) return {{}, in_literal_, true, eos};
  const auto& names = trie_.names;
  switch (state.cursor.kind) {
    case Cursor::Kind::Name: {
      auto kids = names.children(state.cursor.node);
      if (!names.is_terminal(state.cursor.node)) return {kids, {}, false, eos};
      return {kids, after_name_, true, eos};
    }
    case Cursor::Kind::Literal:
      return {{}, in_literal_, false, eos};
    case Cursor::Kind::Value: {
      const auto& values = *trie_.values;
      auto kids = values.children(state.cursor.node);
      if (values.is_terminal(state.cursor.node)) return {kids, quote_only_, false, eos};
      return {kids, {}, false, eos};
    }
    case Cursor::Kind::Inactive:
      break;
  }
  switch (state.prev) {
    case PrevClass::Word: return {{}, after_word_, true, eos};
    case PrevClass::Digit: return {{}, after_digit_, true, eos};
    case PrevClass::Dot: return {{}, after_dot_, false, eos};
    default: return {names.children(PrefixTrie::kRoot), after_other_, true, eos};
  }
}

PrevClass DecodeConstraints::prev_class(TokenId token) const {
  if (token == dot_) return PrevClass::Dot;
  switch (vocab_.token_class(token)) {
    case TokenClass::Word: return PrevClass::Word;
    case TokenClass::Digit: return PrevClass::Digit;
    default: return PrevClass::Other;
  }
}

void DecodeConstraints::step_inactive(DecodeState& state, TokenId token) const {
  if (token == quote_) {
    bool value_mode = enabled_ && trie_.values.has_value();
    state.cursor = {value_mode ? Cursor::Kind::Value : Cursor::Kind::Literal, PrefixTrie::kRoot};
    return;
  }
  bool may_start = state.prev == PrevClass::None || state.prev == PrevClass::Other;
  if (may_start) {
    if (auto next = trie_.names.child(PrefixTrie::kRoot, token)) {
      state.cursor = {Cursor::Kind::Name, *next};
      return;
    }
  }
  state.cursor = {};
}

void DecodeConstraints::advance(DecodeState& state, TokenId token, double log_prob) const {
  state.score += log_prob;
  if (token == vocab_.eos_id()) {
    state.finished = true;
    return;
  }
  state.tokens.push_back(token);
  auto cls = prev_class(token);
  switch (state.cursor.kind) {
    case Cursor::Kind::Name:
      if (auto next = trie_.names.child(state.cursor.node, token)) {
        state.cursor.node = *next;
        state.prev = cls;
        return;
      }
      // The run ended; the token is read in the inactive state. A name
      // cannot be directly followed by another name.
      state.cursor = {};
      state.prev = PrevClass::Word;
      step_inactive(state, token);
      state.prev = cls;
      return;
    case Cursor::Kind::Literal:
      if (token == quote_) state.cursor = {};
      state.prev = PrevClass::Other;
      return;
    case Cursor::Kind::Value:
      if (auto next = trie_.values->child(state.cursor.node, token)) {
        state.cursor.node = *next;
      } else {
        state.cursor = {};
      }
      state.prev = PrevClass::Other;
      return;
    case Cursor::Kind::Inactive:
      step_inactive(state, token);
      state.prev = cls;
      return;
  }
}

}  // namespace structsql
