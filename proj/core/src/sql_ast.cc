#include "structsql/sql_ast.h"

#include <algorithm>
#include <map>

#include "structsql/linking.h"
#include "structsql/text.h"

namespace structsql::sql {

std::string_view agg_name(Agg agg) {
  switch (agg) {
    case Agg::None: return "";
    case Agg::Count: return "COUNT";
    case Agg::Sum: return "SUM";
    case Agg::Avg: return "AVG";
    case Agg::Min: return "MIN";
    case Agg::Max: return "MAX";
  }
  return "";
}

std::string_view compare_op_name(CompareOp op) {
  switch (op) {
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
    case CompareOp::Lt: return "<";
    case CompareOp::Gt: return ">";
    case CompareOp::Le: return "<=";
    case CompareOp::Ge: return ">=";
    case CompareOp::Like: return "LIKE";
    case CompareOp::In: return "IN";
    case CompareOp::NotIn: return "NOT IN";
    case CompareOp::Between: return "BETWEEN";
  }
  return "=";
}

std::string_view set_op_name(SetOp op) {
  switch (op) {
    case SetOp::Union: return "UNION";
    case SetOp::Intersect: return "INTERSECT";
    case SetOp::Except: return "EXCEPT";
  }
  return "UNION";
}

namespace {

std::string_view arith_name(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
    case ArithOp::None: return "";
  }
  return "";
}

std::string render_column(const ColumnName& c) {
  return c.table.empty() ? c.column : c.table + "." + c.column;
}

std::string render_col_unit(const ColUnit& u) {
  if (u.agg == Agg::None) return render_column(u.col);
  return std::string(agg_name(u.agg)) + "(" + (u.distinct ? "DISTINCT " : "") + render_column(u.col) + ")";
}

std::string render_val_unit(const ValUnit& v) {
  std::string out = render_col_unit(v.left);
  if (v.op != ArithOp::None) out += " " + std::string(arith_name(v.op)) + " " + render_col_unit(v.right);
  return out;
}

std::string render_literal(const Literal& l) {
  if (l.kind == Literal::Kind::Number) return l.text;
  std::string out = "'";
  for (char c : l.text) {
    if (c == '\'') out += "''";
    else out.push_back(c);
  }
  return out + "'";
}

std::string render_operand(const Operand& o) {
  if (const auto* l = std::get_if<Literal>(&o)) return render_literal(*l);
  if (const auto* u = std::get_if<ColUnit>(&o)) return render_col_unit(*u);
  return "(" + render_sql(*std::get<Box<Query>>(o)) + ")";
}

std::string render_condition(const Condition& c) {
  if (c.kind == Condition::Kind::Predicate) {
    const auto& p = c.predicate;
    std::string out = render_val_unit(p.left) + " " + std::string(compare_op_name(p.op)) + " " + render_operand(p.right);
    if (p.op == CompareOp::Between && p.upper) out += " AND " + render_operand(*p.upper);
    return out;
  }
  std::string sep = c.kind == Condition::Kind::And ? " AND " : " OR ";
  std::string out;
  for (std::size_t i = 0; i < c.children.size(); ++i) {
    if (i) out += sep;
    const auto& child = c.children[i];
    bool paren = child.kind == Condition::Kind::Or ||
                 (child.kind == Condition::Kind::And && c.kind == Condition::Kind::And);
    out += paren ? "(" + render_condition(child) + ")" : render_condition(child);
  }
  return out;
}

int table_position(const FromClause& from, const std::string& table) {
  for (std::size_t i = 0; i < from.tables.size(); ++i)
    if (text::iequals(from.tables[i], table)) return static_cast<int>(i);
  return static_cast<int>(from.tables.size()) - 1;
}

std::string render_from(const FromClause& from) {
  std::map<int, std::vector<const JoinCondition*>> attached;
  for (const auto& j : from.joins) {
    int pos = std::max(table_position(from, j.left.table), table_position(from, j.right.table));
    attached[std::max(pos, 1)].push_back(&j);
  }
  std::string out;
  for (std::size_t i = 0; i < from.tables.size(); ++i) {
    if (i) out += " JOIN ";
    out += from.tables[i];
    auto it = attached.find(static_cast<int>(i));
    if (it == attached.end() || i == 0) continue;
    out += " ON ";
    for (std::size_t k = 0; k < it->second.size(); ++k) {
      if (k) out += " AND ";
      out += render_column(it->second[k]->left) + " = " + render_column(it->second[k]->right);
    }
  }
  return out;
}

}  // namespace

std::string render_sql(const Query& q) {
  std::string out = "SELECT ";
  if (q.distinct) out += "DISTINCT ";
  for (std::size_t i = 0; i < q.select.size(); ++i) {
    if (i) out += ", ";
    out += render_val_unit(q.select[i]);
  }
  out += " FROM " + render_from(q.from);
  if (q.where) out += " WHERE " + render_condition(*q.where);
  if (!q.group_by.empty()) {
    out += " GROUP BY ";
    for (std::size_t i = 0; i < q.group_by.size(); ++i) out += (i ? ", " : "") + render_column(q.group_by[i]);
  }
  if (q.having) out += " HAVING " + render_condition(*q.having);
  if (!q.order_by.empty()) {
    out += " ORDER BY ";
    for (std::size_t i = 0; i < q.order_by.size(); ++i) {
      if (i) out += ", ";
      out += render_val_unit(q.order_by[i].expr) + (q.order_by[i].dir == OrderDir::Desc ? " DESC" : " ASC");
    }
  }
  if (q.limit) out += " LIMIT " + std::to_string(*q.limit);
  if (q.set_op && q.set_rhs) out += " " + std::string(set_op_name(*q.set_op)) + " " + render_sql(*q.set_rhs);
  return out;
}

bool ILess::operator()(const std::string& a, const std::string& b) const {
  return text::to_lower(a) < text::to_lower(b);
}

namespace {

struct MentionWalker {
  MentionedSchema out;
  bool recurse = true;
  const FromClause* from = nullptr;

  void column(const ColumnName& c) {
    if (c.is_star() && c.table.empty()) {
      if (from)
        for (const auto& t : from->tables) out.columns.insert(t + ".*");
      return;
    }
    if (!c.table.empty()) out.tables.insert(c.table);
    out.columns.insert(render_column(c));
  }
  void col_unit(const ColUnit& u) { column(u.col); }
  void val_unit(const ValUnit& v) {
    col_unit(v.left);
    if (v.op != ArithOp::None) col_unit(v.right);
  }
  void operand(const Operand& o) {
    if (const auto* u = std::get_if<ColUnit>(&o)) col_unit(*u);
    else if (const auto* q = std::get_if<Box<Query>>(&o); q && recurse) query(**q);
  }
  void condition(const Condition& c) {
    if (c.kind != Condition::Kind::Predicate) {
      for (const auto& child : c.children) condition(child);
      return;
    }
    val_unit(c.predicate.left);
    operand(c.predicate.right);
    if (c.predicate.upper) operand(*c.predicate.upper);
  }
  void query(const Query& q) {
    const FromClause* saved = from;
    from = &q.from;
    for (const auto& t : q.from.tables) out.tables.insert(t);
    for (const auto& j : q.from.joins) column(j.left), column(j.right);
    for (const auto& v : q.select) val_unit(v);
    if (q.where) condition(*q.where);
    for (const auto& g : q.group_by) column(g);
    if (q.having) condition(*q.having);
    for (const auto& o : q.order_by) val_unit(o.expr);
    from = saved;
    if (recurse && q.set_rhs) query(*q.set_rhs);
  }
};

}  // namespace

MentionedSchema mentioned_schema(const Query& q) {
  MentionWalker w;
  w.query(q);
  return std::move(w.out);
}

MentionedSchema block_mentions(const Query& q) {
  MentionWalker w;
  w.recurse = false;
  w.query(q);
  return std::move(w.out);
}

namespace {

class Canonicalizer {
 public:
  explicit Canonicalizer(const ComponentOptions& options) : options_(options) {}

  ComponentSet build(const Query& q) {
    ComponentSet cs;
    cs.distinct = q.distinct;
    for (const auto& v : q.select) cs.select.push_back(val_unit(v));
    std::sort(cs.select.begin(), cs.select.end());
    for (const auto& t : q.from.tables) cs.from_tables.push_back(text::to_lower(t));
    std::sort(cs.from_tables.begin(), cs.from_tables.end());
    cs.from_tables.erase(std::unique(cs.from_tables.begin(), cs.from_tables.end()), cs.from_tables.end());
    for (const auto& j : q.from.joins) {
      auto a = column(j.left), b = column(j.right);
      if (b < a) std::swap(a, b);
      cs.joins.push_back(a + "=" + b);
    }
    std::sort(cs.joins.begin(), cs.joins.end());
    cs.joins.erase(std::unique(cs.joins.begin(), cs.joins.end()), cs.joins.end());
    if (q.where) cs.where = condition(*q.where);
    for (const auto& g : q.group_by) cs.group_by.push_back(column(g));
    std::sort(cs.group_by.begin(), cs.group_by.end());
    cs.group_by.erase(std::unique(cs.group_by.begin(), cs.group_by.end()), cs.group_by.end());
    if (q.having) cs.having = condition(*q.having);
    for (const auto& o : q.order_by)
      cs.order_by.push_back(val_unit(o.expr) + (o.dir == OrderDir::Desc ? " desc" : " asc"));
    if (q.limit) cs.limit = std::to_string(*q.limit);
    if (q.set_op && q.set_rhs) {
      cs.set_op = text::to_lower(set_op_name(*q.set_op)) + ":{" + build(*q.set_rhs).to_string() + "}";
    }
    return cs;
  }

 private:
  static std::string column(const ColumnName& c) { return text::to_lower(render_column(c)); }

  static std::string col_unit(const ColUnit& u) {
    if (u.agg == Agg::None) return column(u.col);
    return text::to_lower(agg_name(u.agg)) + "(" + (u.distinct ? "distinct " : "") + column(u.col) + ")";
  }

  static std::string val_unit(const ValUnit& v) {
    std::string out = col_unit(v.left);
    if (v.op != ArithOp::None) out += std::string(arith_name(v.op)) + col_unit(v.right);
    return out;
  }

  ColumnType hint_for(const ValUnit& left) const {
    if (!options_.schema || left.op != ArithOp::None || left.left.agg == Agg::Count) return ColumnType::Other;
    const auto& c = left.left.col;
    if (c.table.empty() || c.is_star()) return ColumnType::Other;
    auto t = options_.schema->find_table(c.table);
    if (!t) return ColumnType::Other;
    auto ref = options_.schema->find_column(*t, c.column);
    return ref ? options_.schema->column(*ref).type : ColumnType::Other;
  }

  std::string literal(const Literal& l, ColumnType hint) const {
    if (!options_.compare_values) return "value";
    if (hint == ColumnType::Other || hint == ColumnType::Boolean) {
      if (auto n = canonical_number(l.text)) return "v:" + *n;
      return "v:" + normalize_value(l.text, ColumnType::Text).text;
    }
    return "v:" + normalize_value(l.text, hint).text;
  }

  std::string operand(const Operand& o, ColumnType hint) {
    if (const auto* l = std::get_if<Literal>(&o)) return literal(*l, hint);
    if (const auto* u = std::get_if<ColUnit>(&o)) return col_unit(*u);
    return "(" + build(*std::get<Box<Query>>(o)).to_string() + ")";
  }

  std::string condition(const Condition& c) {
    if (c.kind == Condition::Kind::Predicate) {
      const auto& p = c.predicate;
      ColumnType hint = hint_for(p.left);
      std::string out = val_unit(p.left) + " " + text::to_lower(compare_op_name(p.op)) + " " + operand(p.right, hint);
      if (p.upper) out += " and " + operand(*p.upper, hint);
      return out;
    }
    std::vector<std::string> parts;
    for (const auto& child : c.children) parts.push_back(condition(child));
    std::sort(parts.begin(), parts.end());
    return std::string(c.kind == Condition::Kind::And ? "and" : "or") + "[" + text::join(parts, "; ") + "]";
  }

  const ComponentOptions& options_;
};

}  // namespace

std::string ComponentSet::to_string() const {
  std::string out = "select" + std::string(distinct ? " distinct" : "") + "=[" + text::join(select, ", ") + "]";
  out += " from=[" + text::join(from_tables, ", ") + "]";
  out += " joins=[" + text::join(joins, ", ") + "]";
  out += " where=" + where;
  out += " group=[" + text::join(group_by, ", ") + "]";
  out += " having=" + having;
  out += " order=[" + text::join(order_by, ", ") + "]";
  out += " limit=" + limit;
  out += " setop=" + set_op;
  return out;
}

ComponentSet component_set(const Query& q, const ComponentOptions& options) {
  return Canonicalizer(options).build(q);
}

}  // namespace structsql::sql
