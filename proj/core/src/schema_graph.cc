#include "structsql/schema_graph.h"

#include <algorithm>
#include <deque>
#include <set>

namespace structsql {

SchemaGraph SchemaGraph::build(const DatabaseSchema& schema) {
  SchemaGraph g;
  const int n_tables = static_cast<int>(schema.table_count());
  for (int t = 0; t < n_tables; ++t) g.nodes_.push_back({GraphNode::Kind::Table, t, -1});
  for (int t = 0; t < n_tables; ++t) {
    g.column_offset_.push_back(static_cast<int>(g.nodes_.size()));
    for (int c = 0; c < static_cast<int>(schema.table(t).columns.size()); ++c) {
      int id = static_cast<int>(g.nodes_.size());
      g.nodes_.push_back({GraphNode::Kind::Column, t, c});
      g.edges_.push_back({EdgeKind::Affiliation, t, id});
    }
  }

  std::set<std::pair<int, int>> links;
  for (const auto& fk : schema.foreign_keys()) {
    int a = g.column_node(fk.child), b = g.column_node(fk.parent);
    if (a != b) g.edges_.push_back({EdgeKind::ForeignKey, std::min(a, b), std::max(a, b)});
    // a foreign key inside one table does not link the table to itself
    if (fk.child.table != fk.parent.table)
      links.insert({std::min(fk.child.table, fk.parent.table), std::max(fk.child.table, fk.parent.table)});
  }
  for (auto [a, b] : links) g.edges_.push_back({EdgeKind::TableLink, a, b});
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  g.table_adjacency_.assign(n_tables, {});
  for (auto [a, b] : links) {
    g.table_adjacency_[a].push_back(b);
    g.table_adjacency_[b].push_back(a);
  }
  for (auto& adj : g.table_adjacency_) std::sort(adj.begin(), adj.end());

  g.component_.assign(n_tables, -1);
  int next = 0;
  for (int t = 0; t < n_tables; ++t) {
    if (g.component_[t] >= 0) continue;
    std::deque<int> queue{t};
    g.component_[t] = next;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int v : g.table_adjacency_[u])
        if (g.component_[v] < 0) g.component_[v] = next, queue.push_back(v);
    }
    ++next;
  }
  g.foreign_keys_.assign(schema.foreign_keys().begin(), schema.foreign_keys().end());
  return g;
}

int SchemaGraph::column_node(ColumnRef ref) const {
  return column_offset_.at(static_cast<std::size_t>(ref.table)) + ref.column;
}

bool SchemaGraph::tables_adjacent(int a, int b) const {
  const auto& adj = table_adjacency_.at(a);
  return std::binary_search(adj.begin(), adj.end(), b);
}

bool SchemaGraph::tables_connected(int a, int b) const {
  return component_.at(a) == component_.at(b);
}

std::vector<int> SchemaGraph::table_distances(int source) const {
  std::vector<int> dist(table_count(), -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v : table_adjacency_[u])
      if (dist[v] < 0) dist[v] = dist[u] + 1, queue.push_back(v);
  }
  return dist;
}

std::vector<int> SchemaGraph::shortest_table_path(int a, int b) const {
  if (!tables_connected(a, b)) return {};
  // Walk forward from a, always stepping to the smallest-index neighbour that
  // is one hop closer to b. This yields the lexicographically least path.
  auto to_b = table_distances(b);
  std::vector<int> path{a};
  int cur = a;
  while (cur != b) {
    for (int v : table_adjacency_[cur]) {
      if (to_b[v] == to_b[cur] - 1) {
        cur = v;
        break;
      }
    }
    path.push_back(cur);
  }
  return path;
}

std::optional<ForeignKey> SchemaGraph::join_key(int a, int b) const {
  for (const auto& fk : foreign_keys_) {
    if ((fk.child.table == a && fk.parent.table == b) || (fk.child.table == b && fk.parent.table == a))
      return fk;
  }
  return std::nullopt;
}

}  // namespace structsql
