#pragma once

#include <optional>
#include <span>
#include <vector>

#include "structsql/schema.h"

namespace structsql {

enum class EdgeKind { Affiliation, ForeignKey, TableLink };

struct GraphNode {
  enum class Kind { Table, Column };
  Kind kind;
  int table;
  int column;  // -1 for table nodes
};

/// Undirected edge between node ids, stored with a < b.
struct GraphEdge {
  EdgeKind kind;
  int a;
  int b;
  auto operator<=>(const GraphEdge&) const = default;
};

/// Tables and columns as nodes; affiliation, foreign-key and table-link edges.
/// Node ids: tables occupy [0, table_count), columns follow in table order.
/// The "*" pseudo-column is not a node.
class SchemaGraph {
 public:
  static SchemaGraph build(const DatabaseSchema& schema);

  std::span<const GraphNode> nodes() const { return nodes_; }
  std::span<const GraphEdge> edges() const { return edges_; }
  std::size_t table_count() const { return table_adjacency_.size(); }

  int table_node(int table) const { return table; }
  int column_node(ColumnRef ref) const;

  /// Tables adjacent through a table-link edge, ascending.
  std::span<const int> table_neighbors(int table) const { return table_adjacency_.at(table); }
  bool tables_adjacent(int a, int b) const;
  bool tables_connected(int a, int b) const;

  /// Fewest-edge path a..b inclusive over table links, or empty when
  /// disconnected. Among equal-length paths the one whose sequence of table
  /// indices is lexicographically smallest wins.
  std::vector<int> shortest_table_path(int a, int b) const;
  /// Edge distances from `source` to every table (-1 when unreachable).
  std::vector<int> table_distances(int source) const;

  /// First-declared foreign key joining the two tables in either direction.
  std::optional<ForeignKey> join_key(int a, int b) const;

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<int> column_offset_;  // per table, first column node id
  std::vector<std::vector<int>> table_adjacency_;
  std::vector<int> component_;
  std::vector<ForeignKey> foreign_keys_;
};

}  // namespace structsql
