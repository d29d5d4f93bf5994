#include "structsql/prefix_trie.h"

#include <algorithm>

#include "structsql/error.h"

namespace structsql {

PrefixTrie::Builder::Builder() { nodes_.emplace_back(); }

bool PrefixTrie::Builder::insert(std::span<const TokenId> tokens, TrieItem item) {
  if (tokens.empty()) return false;
  NodeId cur = kRoot;
  for (TokenId tok : tokens) {
    auto it = nodes_[cur].children.find(tok);
    if (it != nodes_[cur].children.end()) {
      cur = it->second;
    } else {
      auto next = static_cast<NodeId>(nodes_.size());
      nodes_[cur].children.emplace(tok, next);
      nodes_.emplace_back();
      cur = next;
    }
  }
  auto& items = nodes_[cur].items;
  if (std::find(items.begin(), items.end(), item) == items.end()) items.push_back(std::move(item));
  return true;
}

PrefixTrie PrefixTrie::Builder::freeze() && {
  PrefixTrie t;
  t.offsets_.reserve(nodes_.size() + 1);
  t.item_offsets_.reserve(nodes_.size() + 1);
  t.offsets_.push_back(0);
  t.item_offsets_.push_back(0);
  for (auto& node : nodes_) {
    for (auto [tok, id] : node.children) {
      t.child_tokens_.push_back(tok);
      t.child_nodes_.push_back(id);
    }
    t.offsets_.push_back(static_cast<std::uint32_t>(t.child_tokens_.size()));
    for (auto& item : node.items) t.items_.push_back(std::move(item));
    t.item_offsets_.push_back(static_cast<std::uint32_t>(t.items_.size()));
  }
  return t;
}

std::optional<PrefixTrie::NodeId> PrefixTrie::child(NodeId node, TokenId token) const {
  auto kids = children(node);
  auto it = std::lower_bound(kids.begin(), kids.end(), token);
  if (it == kids.end() || *it != token) return std::nullopt;
  return child_nodes_[offsets_[node] + static_cast<std::size_t>(it - kids.begin())];
}

std::size_t PrefixTrie::terminal_count() const {
  std::size_t n = 0;
  for (NodeId i = 0; i < node_count(); ++i) n += is_terminal(i) ? 1 : 0;
  return n;
}

std::vector<std::vector<TokenId>> PrefixTrie::paths() const {
  std::vector<std::vector<TokenId>> out;
  if (node_count() == 0) return out;
  std::vector<TokenId> prefix;
  auto walk = [&](auto&& self, NodeId node) -> void {
    if (is_terminal(node)) out.push_back(prefix);
    auto kids = children(node);
    for (std::size_t i = 0; i < kids.size(); ++i) {
      prefix.push_back(kids[i]);
      self(self, child_nodes_[offsets_[node] + i]);
      prefix.pop_back();
    }
  };
  walk(walk, kRoot);
  return out;
}

SchemaTrie build_trie(const DatabaseSchema& schema, const Vocabulary& vocab, bool value_mode) {
  PrefixTrie::Builder names;
  auto add = [&](PrefixTrie::Builder& b, const std::string& surface, TrieItem item) {
    auto ids = vocab.encode(surface);
    if (ids.empty()) throw Untokenizable("schema name '" + surface + "' has no tokens");
    item.surface = surface;
    b.insert(ids, std::move(item));
  };
  add(names, "*", {TrieItem::Kind::Star, {}, {}});
  for (int t = 0; t < static_cast<int>(schema.table_count()); ++t) {
    add(names, schema.table(t).name, {TrieItem::Kind::Table, SchemaItem::of_table(t), {}});
    add(names, schema.table(t).name + ".*", {TrieItem::Kind::Star, SchemaItem::of_table(t), {}});
  }
  for (auto ref : schema.all_columns())
    add(names, schema.qualified_name(ref), {TrieItem::Kind::Column, SchemaItem::of_column(ref), {}});

  SchemaTrie out{std::move(names).freeze(), std::nullopt};
  if (value_mode && schema.has_sample_values()) {
    PrefixTrie::Builder values;
    for (auto ref : schema.all_columns()) {
      const auto& col = schema.column(ref);
      if (!col.sample_values) continue;
      for (const auto& v : *col.sample_values) {
        if (v.empty()) continue;
        std::string escaped;
        for (char c : v) escaped += c == '\'' ? std::string("''") : std::string(1, c);
        add(values, escaped, {TrieItem::Kind::Value, SchemaItem::of_column(ref), {}});
      }
    }
    out.values = std::move(values).freeze();
  }
  return out;
}

}  // namespace structsql
