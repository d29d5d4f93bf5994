#include <cctype>
#include <set>

#include "structsql/error.h"
#include "structsql/sql_ast.h"
#include "structsql/text.h"

namespace structsql::sql {
namespace {

enum class TokKind { Ident, QuotedIdent, Number, String, Symbol, End };

struct Tok {
  TokKind kind;
  std::string text;
  std::size_t pos;
};

const std::set<std::string, std::less<>>& reserved() {
  static const std::set<std::string, std::less<>> kWords = {
      "SELECT", "DISTINCT", "FROM",  "AS",   "JOIN", "INNER", "ON",      "WHERE",  "GROUP",
      "BY",     "HAVING",   "ORDER", "ASC",  "DESC", "LIMIT", "UNION",   "INTERSECT", "EXCEPT",
      "AND",    "OR",       "NOT",   "IN",   "LIKE", "BETWEEN", "LEFT",  "RIGHT",  "OUTER",
      "CROSS",  "FULL",     "NATURAL", "USING"};
  return kWords;
}

std::vector<Tok> lex(std::string_view s) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({TokKind::Ident, std::string(s.substr(start, i - start)), start});
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      if (i < s.size() && (std::isalpha(static_cast<unsigned char>(s[i])) || s[i] == '_'))
        throw SqlSyntaxError(i, "malformed number");
      out.push_back({TokKind::Number, std::string(s.substr(start, i - start)), start});
    } else if (c == '\'' || c == '"') {
      std::string value;
      ++i;
      for (;;) {
        if (i >= s.size()) throw SqlSyntaxError(start, "unterminated string literal");
        if (s[i] == c) {
          if (i + 1 < s.size() && s[i + 1] == c) {
            value.push_back(c);
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        value.push_back(s[i++]);
      }
      out.push_back({TokKind::String, std::move(value), start});
    } else if (c == '`') {
      auto close = s.find('`', i + 1);
      if (close == std::string_view::npos) throw SqlSyntaxError(start, "unterminated quoted identifier");
      out.push_back({TokKind::QuotedIdent, std::string(s.substr(i + 1, close - i - 1)), start});
      i = close + 1;
    } else {
      static const char* kTwo[] = {"!=", "<>", "<=", ">="};
      std::string sym(1, c);
      for (const char* two : kTwo) {
        if (s.substr(i, 2) == two) sym = two;
      }
      if (sym.size() == 1 && std::string_view("(),.*=<>+-/;").find(c) == std::string_view::npos)
        throw SqlSyntaxError(i, std::string("unexpected character '") + c + "'");
      i += sym.size();
      out.push_back({TokKind::Symbol, sym, start});
    }
  }
  out.push_back({TokKind::End, "", s.size()});
  return out;
}

struct Scope {
  std::vector<std::string> tables;
  std::vector<std::string> aliases;  // parallel to tables; may be empty strings
};

class Parser {
 public:
  Parser(std::string_view text, const DatabaseSchema* schema) : toks_(lex(text)), schema_(schema) {}

  Query parse() {
    Query q = parse_query();
    if (peek_symbol(";")) ++pos_;
    if (peek().kind != TokKind::End) fail("unexpected trailing input '" + peek().text + "'");
    return q;
  }

 private:
  const Tok& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  [[noreturn]] void fail(const std::string& what) const { throw SqlSyntaxError(peek().pos, what); }

  bool peek_kw(std::string_view kw, std::size_t ahead = 0) const {
    const auto& t = peek(ahead);
    return t.kind == TokKind::Ident && text::iequals(t.text, kw);
  }
  bool peek_symbol(std::string_view sym, std::size_t ahead = 0) const {
    const auto& t = peek(ahead);
    return t.kind == TokKind::Symbol && t.text == sym;
  }
  bool accept_kw(std::string_view kw) {
    if (!peek_kw(kw)) return false;
    ++pos_;
    return true;
  }
  bool accept_symbol(std::string_view sym) {
    if (!peek_symbol(sym)) return false;
    ++pos_;
    return true;
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("expected " + std::string(kw));
  }
  void expect_symbol(std::string_view sym) {
    if (!accept_symbol(sym)) fail("expected '" + std::string(sym) + "'");
  }
  bool is_reserved(const Tok& t) const {
    return t.kind == TokKind::Ident && reserved().count(text::to_upper(t.text)) > 0;
  }
  std::string expect_identifier(const char* what) {
    const auto& t = peek();
    if (t.kind == TokKind::QuotedIdent || (t.kind == TokKind::Ident && !is_reserved(t))) {
      ++pos_;
      return t.text;
    }
    fail(std::string("expected ") + what);
  }

  Query parse_query() {
    Query q = parse_block();
    std::optional<SetOp> op;
    if (accept_kw("UNION")) op = SetOp::Union;
    else if (accept_kw("INTERSECT")) op = SetOp::Intersect;
    else if (accept_kw("EXCEPT")) op = SetOp::Except;
    if (op) {
      if (accept_kw("ALL")) fail("UNION ALL is not supported");
      q.set_op = op;
      q.set_rhs = parse_query();
    }
    return q;
  }

  Query parse_block() {
    Query q;
    expect_kw("SELECT");
    q.distinct = accept_kw("DISTINCT");
    std::vector<ValUnit> select;
    do {
      select.push_back(parse_val_unit());
    } while (accept_symbol(","));
    expect_kw("FROM");
    scopes_.push_back({});
    q.from = parse_from();
    for (auto& v : select) resolve(v);
    q.select = std::move(select);
    if (accept_kw("WHERE")) q.where = parse_condition();
    if (accept_kw("GROUP")) {
      expect_kw("BY");
      do {
        q.group_by.push_back(resolve(parse_column_name()));
      } while (accept_symbol(","));
    }
    if (accept_kw("HAVING")) q.having = parse_condition();
    if (accept_kw("ORDER")) {
      expect_kw("BY");
      do {
        OrderItem item;
        item.expr = parse_val_unit();
        resolve(item.expr);
        if (accept_kw("DESC")) item.dir = OrderDir::Desc;
        else accept_kw("ASC");
        q.order_by.push_back(std::move(item));
      } while (accept_symbol(","));
    }
    if (accept_kw("LIMIT")) {
      const auto& t = peek();
      if (t.kind != TokKind::Number || t.text.find('.') != std::string::npos) fail("LIMIT expects an integer");
      q.limit = std::stoll(t.text);
      ++pos_;
    }
    scopes_.pop_back();
    return q;
  }

  FromClause parse_from() {
    FromClause from;
    auto& scope = scopes_.back();
    auto table_ref = [&] {
      if (peek_symbol("(")) fail("subqueries in FROM are not supported");
      std::string name = expect_identifier("table name");
      std::string alias;
      if (accept_kw("AS")) alias = expect_identifier("alias");
      else if (peek().kind == TokKind::Ident && !is_reserved(peek())) alias = expect_identifier("alias");
      if (schema_) {
        auto t = schema_->find_table(name);
        if (!t) throw UnknownTable("unknown table " + name);
        name = schema_->table(*t).name;
      }
      for (const auto& existing : scope.tables)
        if (text::iequals(existing, name)) fail("table " + name + " appears twice in FROM");
      scope.tables.push_back(name);
      scope.aliases.push_back(alias);
      from.tables.push_back(name);
    };
    table_ref();
    std::vector<std::pair<ColumnName, ColumnName>> raw_joins;
    for (;;) {
      if (accept_symbol(",")) {
        table_ref();
        continue;
      }
      if (peek_kw("LEFT") || peek_kw("RIGHT") || peek_kw("FULL") || peek_kw("CROSS") || peek_kw("NATURAL") ||
          peek_kw("OUTER"))
        fail("only inner joins are supported");
      bool inner = accept_kw("INNER");
      if (!accept_kw("JOIN")) {
        if (inner) fail("expected JOIN");
        break;
      }
      table_ref();
      if (accept_kw("ON")) {
        do {
          ColumnName l = parse_column_name();
          expect_symbol("=");
          ColumnName r = parse_column_name();
          raw_joins.emplace_back(std::move(l), std::move(r));
        } while (accept_kw("AND"));
      }
    }
    for (auto& [l, r] : raw_joins) from.joins.push_back({resolve(l), resolve(r)});
    return from;
  }

  ColumnName parse_column_name() {
    if (accept_symbol("*")) return {"", "*"};
    std::string first = expect_identifier("column");
    if (accept_symbol(".")) {
      if (accept_symbol("*")) return {first, "*"};
      return {first, expect_identifier("column")};
    }
    return {"", first};
  }

  static std::optional<Agg> agg_of(const Tok& t) {
    if (t.kind != TokKind::Ident) return std::nullopt;
    std::string u = text::to_upper(t.text);
    if (u == "COUNT") return Agg::Count;
    if (u == "SUM") return Agg::Sum;
    if (u == "AVG") return Agg::Avg;
    if (u == "MIN") return Agg::Min;
    if (u == "MAX") return Agg::Max;
    return std::nullopt;
  }

  ColUnit parse_col_unit() {
    ColUnit u;
    if (auto agg = agg_of(peek()); agg && peek_symbol("(", 1)) {
      pos_ += 2;
      u.agg = *agg;
      u.distinct = accept_kw("DISTINCT");
      u.col = parse_column_name();
      expect_symbol(")");
      return u;
    }
    u.col = parse_column_name();
    return u;
  }

  ValUnit parse_val_unit() {
    ValUnit v;
    v.left = parse_col_unit();
    static const std::pair<const char*, ArithOp> kOps[] = {
        {"+", ArithOp::Add}, {"-", ArithOp::Sub}, {"*", ArithOp::Mul}, {"/", ArithOp::Div}};
    for (auto [sym, op] : kOps) {
      if (peek_symbol(sym)) {
        ++pos_;
        v.op = op;
        v.right = parse_col_unit();
        break;
      }
    }
    return v;
  }

  Condition parse_condition() {
    std::vector<Condition> parts{parse_conjunction()};
    while (accept_kw("OR")) parts.push_back(parse_conjunction());
    return parts.size() == 1 ? std::move(parts.front()) : Condition::conjunction(Condition::Kind::Or, std::move(parts));
  }

  Condition parse_conjunction() {
    std::vector<Condition> parts{parse_primary_condition()};
    while (accept_kw("AND")) parts.push_back(parse_primary_condition());
    return parts.size() == 1 ? std::move(parts.front()) : Condition::conjunction(Condition::Kind::And, std::move(parts));
  }

  Condition parse_primary_condition() {
    if (accept_symbol("(")) {
      Condition c = parse_condition();
      expect_symbol(")");
      return c;
    }
    if (peek_kw("NOT")) fail("NOT before a condition is not supported");
    Predicate p;
    p.left = parse_val_unit();
    resolve(p.left);
    const auto& t = peek();
    if (t.kind == TokKind::Symbol) {
      static const std::pair<const char*, CompareOp> kOps[] = {
          {"=", CompareOp::Eq}, {"!=", CompareOp::Ne}, {"<>", CompareOp::Ne}, {"<", CompareOp::Lt},
          {">", CompareOp::Gt}, {"<=", CompareOp::Le}, {">=", CompareOp::Ge}};
      bool found = false;
      for (auto [sym, op] : kOps) {
        if (t.text == sym) {
          p.op = op;
          found = true;
        }
      }
      if (!found) fail("expected comparison operator");
      ++pos_;
    } else if (accept_kw("LIKE")) {
      p.op = CompareOp::Like;
    } else if (accept_kw("IN")) {
      p.op = CompareOp::In;
    } else if (accept_kw("NOT")) {
      if (!accept_kw("IN")) fail("only NOT IN is supported");
      p.op = CompareOp::NotIn;
    } else if (accept_kw("BETWEEN")) {
      p.op = CompareOp::Between;
    } else {
      fail("expected comparison operator");
    }
    if ((p.op == CompareOp::In || p.op == CompareOp::NotIn) && !(peek_symbol("(") && peek_kw("SELECT", 1)))
      fail("IN expects a nested query");
    p.right = parse_operand();
    if (p.op == CompareOp::Between) {
      expect_kw("AND");
      p.upper = parse_operand();
    }
    return Condition::leaf(std::move(p));
  }

  Operand parse_operand() {
    if (peek_symbol("(") && peek_kw("SELECT", 1)) {
      ++pos_;
      Query nested = parse_query();
      expect_symbol(")");
      return Box<Query>(std::move(nested));
    }
    const auto& t = peek();
    if (t.kind == TokKind::Number) {
      ++pos_;
      return Literal{Literal::Kind::Number, t.text};
    }
    if (peek_symbol("-") && peek(1).kind == TokKind::Number) {
      std::string digits = peek(1).text;
      pos_ += 2;
      return Literal{Literal::Kind::Number, "-" + digits};
    }
    if (t.kind == TokKind::String) {
      ++pos_;
      return Literal{Literal::Kind::String, t.text};
    }
    ColUnit u = parse_col_unit();
    u.col = resolve(u.col);
    return u;
  }

  void resolve(ValUnit& v) {
    v.left.col = resolve(v.left.col);
    if (v.op != ArithOp::None) v.right.col = resolve(v.right.col);
  }

  // Alias lookup walks scopes from the innermost outwards.
  std::optional<std::string> lookup_qualifier(const std::string& q) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      for (std::size_t i = 0; i < it->tables.size(); ++i)
        if (!it->aliases[i].empty() && text::iequals(it->aliases[i], q)) return it->tables[i];
      for (const auto& t : it->tables)
        if (text::iequals(t, q)) return t;
    }
    return std::nullopt;
  }

  ColumnName resolve(const ColumnName& raw) {
    if (raw.table.empty()) {
      if (raw.is_star() || !schema_) return raw;
      for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
        std::vector<ColumnRef> hits;
        for (const auto& t : it->tables) {
          auto ti = schema_->find_table(t);
          if (auto c = schema_->find_column(*ti, raw.column)) hits.push_back(*c);
        }
        if (hits.size() == 1) return {schema_->table(hits[0].table).name, schema_->column(hits[0]).name};
        if (hits.size() > 1) throw AmbiguousColumn("column " + raw.column + " is ambiguous");
      }
      std::vector<ColumnRef> hits;
      for (int t = 0; t < static_cast<int>(schema_->table_count()); ++t)
        if (auto c = schema_->find_column(t, raw.column)) hits.push_back(*c);
      if (hits.size() == 1) return {schema_->table(hits[0].table).name, schema_->column(hits[0]).name};
      if (hits.size() > 1) throw AmbiguousColumn("column " + raw.column + " is ambiguous");
      throw UnresolvableColumn("no table has column " + raw.column);
    }
    std::string table = lookup_qualifier(raw.table).value_or(raw.table);
    if (!schema_) return {table, raw.column};
    auto t = schema_->find_table(table);
    if (!t) throw UnknownTable("unknown table or alias " + raw.table);
    if (raw.is_star()) return {schema_->table(*t).name, "*"};
    auto c = schema_->find_column(*t, raw.column);
    if (!c) throw UnresolvableColumn("table " + schema_->table(*t).name + " has no column " + raw.column);
    return {schema_->table(*t).name, schema_->column(*c).name};
  }

  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
  const DatabaseSchema* schema_;
  std::vector<Scope> scopes_;
};

}  // namespace

Condition Condition::conjunction(Kind kind, std::vector<Condition> children) {
  Condition out;
  out.kind = kind;
  for (auto& c : children) {
    if (c.kind == kind) {
      for (auto& g : c.children) out.children.push_back(std::move(g));
    } else {
      out.children.push_back(std::move(c));
    }
  }
  return out;
}

Query parse_sql(std::string_view text, const DatabaseSchema* schema) {
  if (text::trim(text).empty()) throw SqlSyntaxError(0, "empty query");
  return Parser(text, schema).parse();
}

}  // namespace structsql::sql
