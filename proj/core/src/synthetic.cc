#include "structsql/synthetic.h"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <string_view>

#include "structsql/error.h"
#include "structsql/schema_graph.h"
#include "structsql/text.h"

namespace structsql {
namespace {

constexpr std::array<std::string_view, 40> kTableWords = {
    "Singer",  "Album",   "Venue",    "Museum",  "Artist",   "Airline", "Airport", "Student",
    "Teacher", "Course",  "School",   "Player",  "Team",     "Game",    "Stadium", "Hotel",
    "Guest",   "Author",  "Book",     "Library", "Film",     "Director", "Studio", "Company",
    "Employee", "Project", "Ship",    "Captain", "Harbor",   "Farm",    "Crop",    "Station",
    "Train",   "Race",    "Driver",   "Clinic",  "Doctor",   "Patient", "Store",   "Product"};

struct AttrWord {
  std::string_view name;
  ColumnType type;
};

constexpr std::array<AttrWord, 24> kAttributes = {{
    {"Name", ColumnType::Text},       {"Title", ColumnType::Text},     {"City", ColumnType::Text},
    {"Country", ColumnType::Text},    {"Genre", ColumnType::Text},     {"Category", ColumnType::Text},
    {"Status", ColumnType::Text},     {"Theme", ColumnType::Text},     {"Nation", ColumnType::Text},
    {"Age", ColumnType::Integer},     {"Capacity", ColumnType::Integer}, {"Rank", ColumnType::Integer},
    {"Score", ColumnType::Integer},   {"Population", ColumnType::Integer}, {"Seats", ColumnType::Integer},
    {"Rating", ColumnType::Real},     {"Price", ColumnType::Real},     {"Budget", ColumnType::Real},
    {"Height", ColumnType::Real},     {"Weight", ColumnType::Real},    {"Founded", ColumnType::Date},
    {"Opened", ColumnType::Date},     {"Released", ColumnType::Date},  {"Joined", ColumnType::Date},
}};

constexpr std::array<std::string_view, 20> kTextValues = {
    "Paris", "London", "Tokyo", "Berlin", "Madrid", "Rome",  "Oslo", "Lima",   "Cairo", "Delhi",
    "gold",  "silver", "rock",  "jazz",   "drama",  "comedy", "open", "closed", "north", "south"};

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }
bool chance(std::mt19937_64& rng, unsigned percent) { return rng() % 100 < percent; }

std::string raw_type(ColumnType t) {
  switch (t) {
    case ColumnType::Integer: return "number";
    case ColumnType::Real: return "real";
    case ColumnType::Date: return "time";
    default: return "text";
  }
}

std::vector<std::string> random_values(std::mt19937_64& rng, ColumnType t) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  while (out.size() < 3) {
    std::string v;
    switch (t) {
      case ColumnType::Integer: v = std::to_string(1 + pick(rng, 2000)); break;
      case ColumnType::Real: v = std::to_string(1 + pick(rng, 500)) + "." + std::to_string(1 + pick(rng, 9)); break;
      case ColumnType::Date: {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", 1990 + static_cast<int>(pick(rng, 30)),
                      1 + static_cast<int>(pick(rng, 12)), 1 + static_cast<int>(pick(rng, 28)));
        v = buf;
        break;
      }
      default: v = std::string(kTextValues[pick(rng, kTextValues.size())]); break;
    }
    if (seen.insert(v).second) out.push_back(v);
  }
  return out;
}

bool is_numeric(ColumnType t) { return t == ColumnType::Integer || t == ColumnType::Real; }

class QueryGen {
 public:
  QueryGen(const DatabaseSchema& schema, std::mt19937_64& rng, const QueryShape& shape)
      : s_(schema), graph_(SchemaGraph::build(schema)), rng_(rng), shape_(shape) {}

  sql::Query block(int depth, int select_count, bool allow_set) {
    using namespace sql;
    Query q;
    std::vector<int> tables = pick_tables(q.from, depth == 0 ? shape_.max_joins : 0);
    std::vector<ColumnRef> cols;
    for (int t : tables)
      for (int c = 0; c < static_cast<int>(s_.table(t).columns.size()); ++c) cols.push_back({t, c});

    int n_select = select_count > 0 ? select_count : 1 + static_cast<int>(pick(rng_, 3));
    bool any_agg = false;
    std::vector<ColumnName> plain;
    for (int i = 0; i < n_select; ++i) {
      ValUnit v;
      if (chance(rng_, 12)) {
        v.left = {Agg::Count, false, {"", "*"}};
        any_agg = true;
      } else {
        ColumnRef c = cols[pick(rng_, cols.size())];
        v.left.col = name(c);
        if (chance(rng_, 25)) {
          v.left.agg = pick_agg(s_.column(c).type);
          v.left.distinct = v.left.agg == Agg::Count && chance(rng_, 30);
          any_agg = true;
        } else if (chance(rng_, 6) && is_numeric(s_.column(c).type)) {
          ColumnRef d = cols[pick(rng_, cols.size())];
          if (is_numeric(s_.column(d).type)) {
            v.op = static_cast<ArithOp>(1 + pick(rng_, 4));
            v.right.col = name(d);
          }
        }
        if (v.left.agg == Agg::None && v.op == ArithOp::None) plain.push_back(v.left.col);
      }
      q.select.push_back(std::move(v));
    }
    q.distinct = chance(rng_, 10);

    if (chance(rng_, 55)) q.where = condition(cols, depth);

    if (any_agg && !plain.empty()) {
      for (auto& c : plain)
        if (std::find(q.group_by.begin(), q.group_by.end(), c) == q.group_by.end()) q.group_by.push_back(c);
    } else if (chance(rng_, 12)) {
      q.group_by.push_back(name(cols[pick(rng_, cols.size())]));
    }
    if (!q.group_by.empty() && chance(rng_, 30)) {
      Predicate p;
      p.left.left = {Agg::Count, false, {"", "*"}};
      p.op = static_cast<CompareOp>(pick(rng_, 6));
      p.right = Literal{Literal::Kind::Number, std::to_string(1 + pick(rng_, 5))};
      q.having = Condition::leaf(std::move(p));
    }
    if (depth == 0 && chance(rng_, 30)) {
      OrderItem item;
      if (!q.group_by.empty() && chance(rng_, 50)) {
        item.expr.left = {Agg::Count, false, {"", "*"}};
      } else {
        item.expr.left.col = name(cols[pick(rng_, cols.size())]);
      }
      item.dir = chance(rng_, 50) ? OrderDir::Asc : OrderDir::Desc;
      q.order_by.push_back(std::move(item));
      if (chance(rng_, 50)) q.limit = static_cast<std::int64_t>(1 + pick(rng_, 10));
    }
    if (allow_set && shape_.allow_set_ops && chance(rng_, 8)) {
      q.set_op = static_cast<SetOp>(pick(rng_, 3));
      q.set_rhs = Box<Query>(block(depth + 1, n_select, false));
    }
    return q;
  }

 private:
  sql::ColumnName name(ColumnRef c) const { return {s_.table(c.table).name, s_.column(c).name}; }

  sql::Agg pick_agg(ColumnType t) {
    using sql::Agg;
    if (is_numeric(t)) return static_cast<Agg>(1 + pick(rng_, 5));
    static constexpr std::array<Agg, 3> kText = {Agg::Count, Agg::Min, Agg::Max};
    return kText[pick(rng_, kText.size())];
  }

  std::vector<int> pick_tables(sql::FromClause& from, int max_joins) {
    std::vector<int> tables{static_cast<int>(pick(rng_, s_.table_count()))};
    int joins = static_cast<int>(pick(rng_, static_cast<std::size_t>(max_joins) + 1));
    for (int j = 0; j < joins; ++j) {
      std::vector<std::pair<int, int>> frontier;  // (inside, outside)
      for (int a : tables)
        for (int b : graph_.table_neighbors(a))
          if (std::find(tables.begin(), tables.end(), b) == tables.end()) frontier.emplace_back(a, b);
      if (frontier.empty()) break;
      auto [a, b] = frontier[pick(rng_, frontier.size())];
      if (std::find(tables.begin(), tables.end(), b) != tables.end()) continue;
      auto fk = graph_.join_key(a, b);
      tables.push_back(b);
      from.joins.push_back({name(fk->child), name(fk->parent)});
    }
    for (int t : tables) from.tables.push_back(s_.table(t).name);
    return tables;
  }

  sql::Literal literal(ColumnRef c, bool like) {
    using sql::Literal;
    const auto& col = s_.column(c);
    std::string v = col.sample_values && !col.sample_values->empty()
                        ? (*col.sample_values)[pick(rng_, col.sample_values->size())]
                        : std::to_string(pick(rng_, 100));
    if (like) return {Literal::Kind::String, "%" + v + "%"};
    return {is_numeric(col.type) ? Literal::Kind::Number : Literal::Kind::String, v};
  }

  sql::Predicate predicate(const std::vector<ColumnRef>& cols, int depth) {
    using namespace sql;
    ColumnRef c = cols[pick(rng_, cols.size())];
    ColumnType type = s_.column(c).type;
    Predicate p;
    p.left.left.col = name(c);
    if (depth == 0 && shape_.allow_nested && chance(rng_, 12)) {
      bool in = chance(rng_, 60);
      Query sub = block(depth + 1, 1, false);
      if (in) {
        p.op = chance(rng_, 70) ? CompareOp::In : CompareOp::NotIn;
        // The nested query selects one plain column.
        sub.select.resize(1);
        sub.select[0] = ValUnit{};
        auto sub_col = first_column(sub);
        sub.select[0].left.col = sub_col;
        sub.group_by.clear();
        sub.having.reset();
      } else {
        p.op = static_cast<CompareOp>(pick(rng_, 6));
      }
      p.right = Box<Query>(std::move(sub));
      return p;
    }
    if (is_numeric(type)) {
      static constexpr std::array<CompareOp, 7> kOps = {CompareOp::Eq, CompareOp::Ne, CompareOp::Lt, CompareOp::Gt,
                                                         CompareOp::Le, CompareOp::Ge, CompareOp::Between};
      p.op = kOps[pick(rng_, kOps.size())];
    } else if (type == ColumnType::Date) {
      static constexpr std::array<CompareOp, 3> kOps = {CompareOp::Eq, CompareOp::Lt, CompareOp::Gt};
      p.op = kOps[pick(rng_, kOps.size())];
    } else {
      static constexpr std::array<CompareOp, 3> kOps = {CompareOp::Eq, CompareOp::Ne, CompareOp::Like};
      p.op = kOps[pick(rng_, kOps.size())];
    }
    p.right = literal(c, p.op == CompareOp::Like);
    if (p.op == CompareOp::Between) p.upper = literal(c, false);
    return p;
  }

  sql::ColumnName first_column(const sql::Query& sub) {
    auto t = s_.find_table(sub.from.tables.front());
    const auto& cols = s_.table(*t).columns;
    return {s_.table(*t).name, cols[pick(rng_, cols.size())].name};
  }

  sql::Condition condition(const std::vector<ColumnRef>& cols, int depth) {
    using sql::Condition;
    std::size_t n = 1 + pick(rng_, 3);
    if (n == 1) return Condition::leaf(predicate(cols, depth));
    std::vector<Condition> parts;
    for (std::size_t i = 0; i < n; ++i) parts.push_back(Condition::leaf(predicate(cols, depth)));
    auto kind = chance(rng_, 70) ? Condition::Kind::And : Condition::Kind::Or;
    if (kind == Condition::Kind::And && chance(rng_, 20)) {
      parts.push_back(Condition::conjunction(Condition::Kind::Or, {Condition::leaf(predicate(cols, depth)),
                                                                  Condition::leaf(predicate(cols, depth))}));
    }
    return Condition::conjunction(kind, std::move(parts));
  }

  const DatabaseSchema& s_;
  SchemaGraph graph_;
  std::mt19937_64& rng_;
  QueryShape shape_;
};

std::string phrase(std::string_view name) {
  std::string out;
  for (char c : name) out += c == '_' ? ' ' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void describe_condition(const sql::Condition& c, std::vector<std::string>& parts) {
  if (c.kind != sql::Condition::Kind::Predicate) {
    for (const auto& child : c.children) describe_condition(child, parts);
    return;
  }
  const auto& p = c.predicate;
  std::string what = phrase(p.left.left.col.column);
  if (const auto* lit = std::get_if<sql::Literal>(&p.right)) {
    std::string v = lit->text;
    v.erase(std::remove(v.begin(), v.end(), '%'), v.end());
    parts.push_back(what + " " + std::string(sql::compare_op_name(p.op)) + " " + v);
  } else {
    parts.push_back(what + " matches a subquery");
  }
}

std::string question_for(const sql::Query& q, bool follow_up) {
  std::vector<std::string> cols;
  for (const auto& v : q.select) {
    std::string c = v.left.col.is_star() ? "records" : phrase(v.left.col.column);
    if (v.left.agg != sql::Agg::None) c = text::to_lower(std::string(sql::agg_name(v.left.agg))) + " of " + c;
    cols.push_back(c);
  }
  std::vector<std::string> tables;
  for (const auto& t : q.from.tables) tables.push_back(phrase(t));
  std::string out = follow_up ? "what about the " : "show the ";
  out += text::join(cols, " and ") + " for each " + text::join(tables, " and ");
  if (q.where) {
    std::vector<std::string> conds;
    describe_condition(*q.where, conds);
    out += " where " + text::join(conds, " and ");
  }
  return out + " ?";
}

}  // namespace

sql::Query random_query(const DatabaseSchema& schema, std::mt19937_64& rng, const QueryShape& shape) {
  return QueryGen(schema, rng, shape).block(0, 0, true);
}

DatabaseSchema random_schema(std::mt19937_64& rng, const std::string& db_id) {
  std::size_t n = 2 + pick(rng, 7);
  std::vector<std::string_view> pool(kTableWords.begin(), kTableWords.end());
  std::vector<TableDef> tables;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = pick(rng, pool.size());
    TableDef t;
    t.name = std::string(pool[k]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
    tables.push_back(std::move(t));
  }
  bool star = chance(rng, 40);
  std::vector<ForeignKey> fks;
  for (std::size_t i = 0; i < n; ++i) {
    auto& t = tables[i];
    t.columns.push_back({t.name + "_id", ColumnType::Integer, "number", true, {}, {}});
    t.primary_key = 0;
    if (i > 0) {
      std::size_t parent = star ? 0 : (chance(rng, 75) ? i - 1 : pick(rng, i));
      t.columns.push_back({tables[parent].name + "_id", ColumnType::Integer, "number", false, {}, {}});
      fks.push_back({{static_cast<int>(i), 1}, {static_cast<int>(parent), 0}});
    }
    std::vector<AttrWord> attrs(kAttributes.begin(), kAttributes.end());
    std::size_t extra = 1 + pick(rng, 4);
    for (std::size_t a = 0; a < extra; ++a) {
      std::size_t k = pick(rng, attrs.size());
      auto attr = attrs[k];
      attrs.erase(attrs.begin() + static_cast<std::ptrdiff_t>(k));
      t.columns.push_back({std::string(attr.name), attr.type, raw_type(attr.type), false, {}, {}});
    }
  }
  for (auto& t : tables)
    for (auto& c : t.columns) c.sample_values = random_values(rng, c.type);
  return DatabaseSchema::build(db_id, std::move(tables), std::move(fks));
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticOptions& options) {
  if (options.schemas == 0 || options.queries == 0) throw ConfigError("synthetic corpus needs at least one schema and one query");
  std::mt19937_64 rng(options.seed);
  SyntheticCorpus out;
  for (std::size_t i = 0; i < options.schemas; ++i)
    out.schemas.push_back(random_schema(rng, "syn_" + std::to_string(i)));
  for (const auto& s : out.schemas)
    for (auto ref : s.all_columns())
      if (const auto& vals = s.column(ref).sample_values) out.content[s.db_id() + "/" + s.qualified_name(ref)] = *vals;

  std::size_t produced = 0, next_id = 0;
  while (produced < options.queries) {
    const auto& schema = out.schemas[pick(rng, out.schemas.size())];
    std::size_t turns = 1 + pick(rng, std::max<std::size_t>(options.max_turns, 1));
    turns = std::min(turns, options.queries - produced);
    Interaction inter{"syn-" + std::to_string(next_id++), schema.db_id(), {}};
    for (std::size_t t = 0; t < turns; ++t) {
      auto q = random_query(schema, rng, options.shape);
      inter.turns.push_back({question_for(q, t > 0), sql::render_sql(q)});
    }
    produced += turns;
    out.dataset.interactions.push_back(std::move(inter));
  }
  return out;
}

void write_corpus(const SyntheticCorpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::string& name, const nlohmann::json& doc) {
    std::ofstream f(std::filesystem::path(dir) / name);
    if (!f) throw ConfigError("cannot write " + name + " in " + dir);
    f << doc.dump(2) << "\n";
  };
  auto tables = nlohmann::json::array();
  for (const auto& s : corpus.schemas) tables.push_back(to_json(s));
  write("tables.json", tables);
  write("dataset.json", to_json(corpus.dataset));
  nlohmann::json content = nlohmann::json::object();
  for (const auto& [k, v] : corpus.content) content[k] = v;
  write("content.json", content);
}

}  // namespace structsql
