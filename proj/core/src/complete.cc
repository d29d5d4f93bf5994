#include "structsql/complete.h"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <set>

#include "structsql/error.h"
#include "structsql/log.h"
#include "structsql/text.h"

namespace structsql {
namespace {

bool induced_connected(const SchemaGraph& graph, const std::vector<char>& in_set) {
  int start = -1, count = 0;
  for (std::size_t t = 0; t < in_set.size(); ++t)
    if (in_set[t]) {
      if (start < 0) start = static_cast<int>(t);
      ++count;
    }
  if (count <= 1) return true;
  std::vector<char> seen(in_set.size(), 0);
  std::vector<int> stack{start};
  seen[start] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : graph.table_neighbors(u))
      if (in_set[v] && !seen[v]) {
        seen[v] = 1;
        ++reached;
        stack.push_back(v);
      }
  }
  return reached == count;
}

std::vector<int> exact_connector(const SchemaGraph& graph, const std::vector<int>& terminals) {
  const int n = static_cast<int>(graph.table_count());
  std::vector<char> base(n, 0);
  for (int t : terminals) base[t] = 1;
  std::vector<int> others;
  for (int t = 0; t < n; ++t)
    if (!base[t]) others.push_back(t);
  // Combinations of the non-terminal tables by increasing size, each size in
  // lexicographic order.
  for (std::size_t k = 0; k <= others.size(); ++k) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
      auto in_set = base;
      for (auto i : idx) in_set[others[i]] = 1;
      if (induced_connected(graph, in_set)) {
        std::vector<int> out;
        for (int t = 0; t < n; ++t)
          if (in_set[t]) out.push_back(t);
        return out;
      }
      // next combination
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == others.size() - k + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return {};  // unreachable: caller checked connectivity
}

std::vector<std::vector<int>> components_of(const SchemaGraph& graph, const std::vector<char>& in_set) {
  std::vector<std::vector<int>> out;
  std::vector<char> seen(in_set.size(), 0);
  for (std::size_t s = 0; s < in_set.size(); ++s) {
    if (!in_set[s] || seen[s]) continue;
    std::vector<int> comp;
    std::vector<int> stack{static_cast<int>(s)};
    seen[s] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      comp.push_back(u);
      for (int v : graph.table_neighbors(u))
        if (in_set[v] && !seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
    }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

// Cheapest path from component `from` to any table of `to`, where entering a
// table outside the current set costs 1. Returns the new tables on it.
std::vector<int> bridge(const SchemaGraph& graph, const std::vector<char>& in_set, const std::vector<int>& from,
                        const std::vector<char>& target) {
  const int n = static_cast<int>(graph.table_count());
  std::vector<int> dist(n, -1), pred(n, -1);
  using Item = std::pair<int, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (int s : from) {
    dist[s] = 0;
    pq.emplace(0, s);
  }
  std::vector<char> done(n, 0);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (target[u]) {
      std::vector<int> added;
      for (int v = u; v >= 0 && dist[v] > 0; v = pred[v])
        if (!in_set[v]) added.push_back(v);
      std::sort(added.begin(), added.end());
      return added;
    }
    for (int v : graph.table_neighbors(u)) {
      int nd = d + (in_set[v] ? 0 : 1);
      if (!done[v] && (dist[v] < 0 || nd < dist[v])) {
        dist[v] = nd;
        pred[v] = u;
        pq.emplace(nd, v);
      }
    }
  }
  return {};
}

std::vector<int> greedy_connector(const SchemaGraph& graph, const std::vector<int>& terminals) {
  std::vector<char> in_set(graph.table_count(), 0);
  for (int t : terminals) in_set[t] = 1;
  for (;;) {
    auto comps = components_of(graph, in_set);
    if (comps.size() <= 1) break;
    std::vector<int> best;
    bool have = false;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      std::vector<char> target(graph.table_count(), 0);
      for (std::size_t j = 0; j < comps.size(); ++j)
        if (j != i)
          for (int t : comps[j]) target[t] = 1;
      auto added = bridge(graph, in_set, comps[i], target);
      if (!have || added.size() < best.size() || (added.size() == best.size() && added < best)) {
        best = std::move(added);
        have = true;
      }
    }
    for (int t : best) in_set[t] = 1;
  }
  std::vector<int> out;
  for (std::size_t t = 0; t < in_set.size(); ++t)
    if (in_set[t]) out.push_back(static_cast<int>(t));
  return out;
}

}  // namespace

std::vector<int> connect_terminals(const SchemaGraph& graph, const std::vector<int>& terminals, ConnectorMode mode) {
  if (terminals.empty()) throw ConfigError("connect_terminals needs at least one table");
  std::vector<int> terms = terminals;
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  for (int t : terms)
    if (t < 0 || static_cast<std::size_t>(t) >= graph.table_count())
      throw DanglingReference("table index " + std::to_string(t) + " is not in the graph");
  for (std::size_t i = 1; i < terms.size(); ++i)
    if (!graph.tables_connected(terms[0], terms[i]))
      throw Disconnected("tables " + std::to_string(terms[0]) + " and " + std::to_string(terms[i]) +
                         " are not linked by foreign keys");
  if (terms.size() == 1) return terms;
  if (mode == ConnectorMode::Auto)
    mode = graph.table_count() <= kExactConnectorLimit ? ConnectorMode::Exact : ConnectorMode::Greedy;
  return mode == ConnectorMode::Exact ? exact_connector(graph, terms) : greedy_connector(graph, terms);
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

int table_index(const DatabaseSchema& schema, const std::string& name) {
  auto t = schema.find_table(name);
  if (!t) throw UnknownTable("unknown table '" + name + "'");
  return *t;
}

class Completer {
 public:
  Completer(const DatabaseSchema& schema, const SchemaGraph& graph, ConnectorMode mode)
      : schema_(schema), graph_(graph), mode_(mode) {}

  void query(sql::Query& q, CompletionPlan& plan) {
    block(q, plan);
    for_nested(q, plan);
    if (q.set_rhs) query(*q.set_rhs, plan);
  }

 private:
  void condition(sql::Condition& c, CompletionPlan& plan) {
    if (c.kind != sql::Condition::Kind::Predicate) {
      for (auto& child : c.children) condition(child, plan);
      return;
    }
    operand(c.predicate.right, plan);
    if (c.predicate.upper) operand(*c.predicate.upper, plan);
  }

  void operand(sql::Operand& op, CompletionPlan& plan) {
    if (auto* nested = std::get_if<Box<sql::Query>>(&op); nested && *nested) query(**nested, plan);
  }

  void for_nested(sql::Query& q, CompletionPlan& plan) {
    if (q.where) condition(*q.where, plan);
    if (q.having) condition(*q.having, plan);
  }

  void block(sql::Query& q, CompletionPlan& plan) {
    const int n = static_cast<int>(schema_.table_count());
    std::vector<int> from_tables;
    for (const auto& name : q.from.tables) from_tables.push_back(table_index(schema_, name));
    std::vector<char> in_from(n, 0);
    for (int t : from_tables) in_from[t] = 1;

    std::vector<int> terminals = from_tables;
    for (const auto& col : block_mentions(q).columns) {
      auto dot = col.find('.');
      if (dot == std::string::npos) continue;
      int t = table_index(schema_, col.substr(0, dot));
      if (std::find(terminals.begin(), terminals.end(), t) == terminals.end()) terminals.push_back(t);
    }
    if (terminals.empty()) return;

    DisjointSets joined(n);
    for (const auto& j : q.from.joins) {
      if (j.left.table.empty() || j.right.table.empty()) continue;
      joined.unite(table_index(schema_, j.left.table), table_index(schema_, j.right.table));
    }
    bool connected = std::all_of(terminals.begin(), terminals.end(),
                                 [&](int t) { return joined.find(t) == joined.find(terminals[0]); });
    if (connected) return;

    auto connector = connect_terminals(graph_, terminals, mode_);
    std::vector<char> in_connector(n, 0);
    for (int t : connector) in_connector[t] = 1;

    // Spanning forest: keep the joins already written, then add table links
    // in index order.
    std::vector<std::pair<int, int>> tree_edges;
    for (int a : connector)
      for (int b : graph_.table_neighbors(a))
        if (a < b && in_connector[b] && joined.unite(a, b)) {
          auto fk = graph_.join_key(a, b);
          if (!fk) throw MissingJoinKey("no foreign key between " + schema_.table(a).name + " and " + schema_.table(b).name);
          sql::JoinCondition jc{{schema_.table(fk->child.table).name, schema_.column(fk->child).name},
                                {schema_.table(fk->parent.table).name, schema_.column(fk->parent).name}};
          q.from.joins.push_back(jc);
          plan.join_conditions.push_back(jc);
          tree_edges.emplace_back(a, b);
          note_alternatives(a, b, *fk);
          for (int t : {a, b}) {
            if (in_from[t]) continue;
            for (const auto& key : {fk->child, fk->parent})
              if (key.table == t) add_unique(plan.added_columns, schema_.qualified_name(key));
          }
        }

    // New FROM order: breadth first over the join graph from the first
    // table, neighbours by ascending index.
    std::vector<std::vector<int>> adj(n);
    for (const auto& j : q.from.joins) {
      if (j.left.table.empty() || j.right.table.empty()) continue;
      int a = table_index(schema_, j.left.table), b = table_index(schema_, j.right.table);
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    for (auto& v : adj) std::sort(v.begin(), v.end());
    int root = from_tables.empty() ? connector.front() : from_tables.front();
    std::vector<int> order;
    std::vector<char> seen(n, 0);
    std::queue<int> bfs;
    bfs.push(root);
    seen[root] = 1;
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop();
      order.push_back(u);
      for (int v : adj[u])
        if (in_connector[v] && !seen[v]) {
          seen[v] = 1;
          bfs.push(v);
        }
    }
    q.from.tables.clear();
    for (int t : order) q.from.tables.push_back(schema_.table(t).name);

    for (int t : order) {
      if (in_from[t]) continue;
      plan.added_tables.push_back(schema_.table(t).name);
      std::string why = schema_.table(t).name + " lies on the join path";
      std::vector<std::string> touches;
      for (auto [a, b] : tree_edges)
        if (a == t || b == t) touches.push_back(schema_.table(a == t ? b : a).name);
      if (!touches.empty()) why += " between " + text::join(touches, " and ");
      plan.rationale.push_back(why);
    }
  }

  void note_alternatives(int a, int b, const ForeignKey& chosen) {
    int count = 0;
    for (const auto& fk : schema_.foreign_keys())
      if ((fk.child.table == a && fk.parent.table == b) || (fk.child.table == b && fk.parent.table == a)) ++count;
    if (count > 1)
      log_info(std::to_string(count) + " foreign keys join " + schema_.table(a).name + " and " +
               schema_.table(b).name + "; using " + schema_.qualified_name(chosen.child) + " = " +
               schema_.qualified_name(chosen.parent));
  }

  static void add_unique(std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  }

  const DatabaseSchema& schema_;
  const SchemaGraph& graph_;
  ConnectorMode mode_;
};

}  // namespace

Completion complete_sql(const sql::Query& q, const DatabaseSchema& schema, const SchemaGraph& graph, ConnectorMode mode) {
  Completion out{q, {}};
  Completer(schema, graph, mode).query(out.query, out.plan);
  return out;
}

}  // namespace structsql
