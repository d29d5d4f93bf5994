#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "structsql/linking.h"
#include "structsql/schema.h"
#include "structsql/vocabulary.h"

namespace structsql {

/// What a complete trie path names.
struct TrieItem {
  enum class Kind { Table, Column, Star, Value };
  Kind kind = Kind::Table;
  SchemaItem item;
  std::string surface;
  bool operator==(const TrieItem&) const = default;
};

/// Token-id trie frozen into contiguous arrays. Children of a node are sorted
/// by token id so lookups are a binary search over the node's fan-out.
class PrefixTrie {
 public:
  using NodeId = std::uint32_t;
  static constexpr NodeId kRoot = 0;

  class Builder {
   public:
    Builder();
    /// Inserts a path; returns false if `tokens` is empty.
    bool insert(std::span<const TokenId> tokens, TrieItem item);
    PrefixTrie freeze() &&;

   private:
    struct Node {
      std::map<TokenId, NodeId> children;
      std::vector<TrieItem> items;
    };
    std::vector<Node> nodes_;
  };

  std::span<const TokenId> children(NodeId node) const {
    return {child_tokens_.data() + offsets_[node], child_tokens_.data() + offsets_[node + 1]};
  }
  std::optional<NodeId> child(NodeId node, TokenId token) const;
  bool is_terminal(NodeId node) const { return item_offsets_[node] != item_offsets_[node + 1]; }
  std::span<const TrieItem> items(NodeId node) const {
    return {items_.data() + item_offsets_[node], items_.data() + item_offsets_[node + 1]};
  }

  std::size_t node_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t terminal_count() const;
  /// Every root-to-terminal token path, depth first in token order.
  std::vector<std::vector<TokenId>> paths() const;

 private:
  std::vector<std::uint32_t> offsets_;
  std::vector<TokenId> child_tokens_;
  std::vector<NodeId> child_nodes_;
  std::vector<std::uint32_t> item_offsets_;
  std::vector<TrieItem> items_;
};

/// Name trie (tables, qualified columns, "*", "Table.*") and, in value mode, a second
/// trie over the attached cell values.
struct SchemaTrie {
  PrefixTrie names;
  std::optional<PrefixTrie> values;
};

/// Throws Untokenizable when a surface form has a piece outside `vocab`.
SchemaTrie build_trie(const DatabaseSchema& schema, const Vocabulary& vocab, bool value_mode = false);

}  // namespace structsql
