#include "structsql/schema.h"

#include <fstream>
#include <set>

#include "structsql/error.h"
#include "structsql/log.h"
#include "structsql/text.h"

namespace structsql {

using nlohmann::json;

std::string_view column_type_name(ColumnType type) {
  switch (type) {
    case ColumnType::Integer: return "Integer";
    case ColumnType::Real: return "Real";
    case ColumnType::Text: return "Text";
    case ColumnType::Date: return "Date";
    case ColumnType::Boolean: return "Boolean";
    case ColumnType::Other: return "Other";
  }
  return "Other";
}

ColumnType parse_column_type(std::string_view raw, bool* recognized) {
  static const std::map<std::string, ColumnType, std::less<>> kLabels = {
      {"number", ColumnType::Integer}, {"int", ColumnType::Integer},
      {"integer", ColumnType::Integer}, {"bigint", ColumnType::Integer},
      {"real", ColumnType::Real}, {"float", ColumnType::Real},
      {"double", ColumnType::Real}, {"decimal", ColumnType::Real},
      {"numeric", ColumnType::Real}, {"text", ColumnType::Text},
      {"string", ColumnType::Text}, {"varchar", ColumnType::Text},
      {"char", ColumnType::Text}, {"time", ColumnType::Date},
      {"date", ColumnType::Date}, {"datetime", ColumnType::Date},
      {"timestamp", ColumnType::Date}, {"boolean", ColumnType::Boolean},
      {"bool", ColumnType::Boolean}, {"others", ColumnType::Other},
      {"other", ColumnType::Other},
  };
  auto it = kLabels.find(text::to_lower(text::trim(raw)));
  if (recognized) *recognized = it != kLabels.end();
  return it == kLabels.end() ? ColumnType::Other : it->second;
}

DatabaseSchema DatabaseSchema::build(std::string db_id, std::vector<TableDef> tables,
                                     std::vector<ForeignKey> foreign_keys,
                                     std::optional<SourceLayout> layout) {
  DatabaseSchema s;
  s.db_id_ = std::move(db_id);
  s.tables_ = std::move(tables);
  s.foreign_keys_ = std::move(foreign_keys);

  std::set<std::string> table_names;
  for (std::size_t t = 0; t < s.tables_.size(); ++t) {
    auto& table = s.tables_[t];
    if (table.name.empty()) throw MalformedDocument(s.db_id_ + ": table with empty name");
    if (!table_names.insert(text::to_lower(table.name)).second)
      throw DuplicateName(s.db_id_ + ": duplicate table " + table.name);
    std::set<std::string> column_names;
    for (const auto& col : table.columns) {
      if (col.name.empty()) throw MalformedDocument(s.db_id_ + ": column with empty name in " + table.name);
      if (!column_names.insert(text::to_lower(col.name)).second)
        throw DuplicateName(s.db_id_ + ": duplicate column " + table.name + "." + col.name);
    }
    if (table.primary_key) {
      int pk = *table.primary_key;
      if (pk < 0 || static_cast<std::size_t>(pk) >= table.columns.size())
        throw DanglingReference(s.db_id_ + ": primary key outside table " + table.name);
      for (std::size_t c = 0; c < table.columns.size(); ++c)
        table.columns[c].is_primary = static_cast<int>(c) == pk;
    }
  }
  auto check = [&](ColumnRef ref) {
    if (ref.table < 0 || static_cast<std::size_t>(ref.table) >= s.tables_.size() || ref.column < 0 ||
        static_cast<std::size_t>(ref.column) >= s.tables_[ref.table].columns.size())
      throw DanglingReference(s.db_id_ + ": foreign key endpoint does not resolve");
  };
  for (const auto& fk : s.foreign_keys_) {
    check(fk.child);
    check(fk.parent);
  }

  if (layout) {
    s.layout_ = std::move(*layout);
  } else {
    s.layout_.column_order.push_back(ColumnRef::star());
    for (int t = 0; t < static_cast<int>(s.tables_.size()); ++t) {
      for (int c = 0; c < static_cast<int>(s.tables_[t].columns.size()); ++c)
        s.layout_.column_order.push_back({t, c});
      if (s.tables_[t].primary_key) s.layout_.primary_keys.push_back({{t, *s.tables_[t].primary_key}});
    }
  }
  return s;
}

const ColumnDef& DatabaseSchema::column(ColumnRef ref) const {
  if (ref.is_star()) {
    static const ColumnDef kStar{"*", ColumnType::Other, "text", false, std::nullopt, std::nullopt};
    return kStar;
  }
  return tables_.at(static_cast<std::size_t>(ref.table)).columns.at(static_cast<std::size_t>(ref.column));
}

std::size_t DatabaseSchema::column_count() const {
  std::size_t n = 0;
  for (const auto& t : tables_) n += t.columns.size();
  return n;
}

std::vector<ColumnRef> DatabaseSchema::all_columns() const {
  std::vector<ColumnRef> out;
  for (int t = 0; t < static_cast<int>(tables_.size()); ++t)
    for (int c = 0; c < static_cast<int>(tables_[t].columns.size()); ++c) out.push_back({t, c});
  return out;
}

std::optional<int> DatabaseSchema::find_table(std::string_view name) const {
  for (std::size_t t = 0; t < tables_.size(); ++t)
    if (text::iequals(tables_[t].name, name)) return static_cast<int>(t);
  return std::nullopt;
}

std::optional<ColumnRef> DatabaseSchema::find_column(int table, std::string_view name) const {
  if (name == "*") return ColumnRef::star();
  const auto& cols = tables_.at(static_cast<std::size_t>(table)).columns;
  for (std::size_t c = 0; c < cols.size(); ++c)
    if (text::iequals(cols[c].name, name)) return ColumnRef{table, static_cast<int>(c)};
  return std::nullopt;
}

std::string DatabaseSchema::qualified_name(ColumnRef ref) const {
  if (ref.is_star()) return "*";
  return table(ref.table).name + "." + column(ref).name;
}

bool DatabaseSchema::has_sample_values() const {
  for (const auto& t : tables_)
    for (const auto& c : t.columns)
      if (c.sample_values && !c.sample_values->empty()) return true;
  return false;
}

DatabaseSchema DatabaseSchema::with_content(const ContentMap& content) const {
  DatabaseSchema copy = *this;
  for (const auto& [key, values] : content) {
    auto dot = key.find('.');
    if (dot == std::string::npos) throw DanglingReference(db_id_ + ": content key without table: " + key);
    auto t = find_table(std::string_view(key).substr(0, dot));
    if (!t) throw DanglingReference(db_id_ + ": content for unknown table: " + key);
    auto c = find_column(*t, std::string_view(key).substr(dot + 1));
    if (!c || c->is_star()) throw DanglingReference(db_id_ + ": content for unknown column: " + key);
    copy.tables_[c->table].columns[c->column].sample_values = values;
  }
  return copy;
}

namespace {

const json& require(const json& doc, const char* field) {
  if (!doc.is_object() || !doc.contains(field))
    throw MalformedDocument(std::string("schema document missing field '") + field + "'");
  return doc.at(field);
}

int as_int(const json& v, const char* what) {
  if (!v.is_number_integer()) throw MalformedDocument(std::string(what) + " must be an integer");
  return v.get<int>();
}

}  // namespace

DatabaseSchema load_schema(const json& doc) {
  const auto& db_id_field = require(doc, "db_id");
  if (!db_id_field.is_string()) throw MalformedDocument("db_id must be a string");
  std::string db_id = db_id_field.get<std::string>();

  const auto& table_names = require(doc, "table_names_original");
  const auto& column_names = require(doc, "column_names_original");
  const auto& column_types = require(doc, "column_types");
  const auto& primary_keys = require(doc, "primary_keys");
  const auto& foreign_keys = require(doc, "foreign_keys");
  if (!table_names.is_array() || !column_names.is_array() || !column_types.is_array() ||
      !primary_keys.is_array() || !foreign_keys.is_array())
    throw MalformedDocument(db_id + ": schema fields must be arrays");
  if (table_names.empty()) throw MalformedDocument(db_id + ": schema has no tables");
  if (column_types.size() != column_names.size())
    throw MalformedDocument(db_id + ": column_types and column_names_original differ in length");

  const json* display_tables = doc.contains("table_names") ? &doc.at("table_names") : nullptr;
  const json* display_columns = doc.contains("column_names") ? &doc.at("column_names") : nullptr;
  if (display_tables && (!display_tables->is_array() || display_tables->size() != table_names.size()))
    throw MalformedDocument(db_id + ": table_names length mismatch");
  if (display_columns && (!display_columns->is_array() || display_columns->size() != column_names.size()))
    throw MalformedDocument(db_id + ": column_names length mismatch");

  std::vector<TableDef> tables(table_names.size());
  for (std::size_t t = 0; t < table_names.size(); ++t) {
    if (!table_names[t].is_string()) throw MalformedDocument(db_id + ": table name must be a string");
    tables[t].name = table_names[t].get<std::string>();
    if (display_tables) tables[t].display_name = display_tables->at(t).get<std::string>();
  }

  DatabaseSchema::SourceLayout layout;
  layout.has_display_names = display_tables && display_columns;
  std::vector<ColumnRef> global;  // document index -> ref
  bool seen_star = false;
  for (std::size_t i = 0; i < column_names.size(); ++i) {
    const auto& entry = column_names[i];
    if (!entry.is_array() || entry.size() != 2 || !entry[1].is_string())
      throw MalformedDocument(db_id + ": column entry must be [table_index, name]");
    int t = as_int(entry[0], "column table index");
    std::string name = entry[1].get<std::string>();
    if (!column_types[i].is_string()) throw MalformedDocument(db_id + ": column type must be a string");
    std::string raw_type = column_types[i].get<std::string>();
    if (t == -1) {
      if (name != "*" || seen_star) throw MalformedDocument(db_id + ": only '*' may use table index -1");
      seen_star = true;
      layout.star_raw_type = raw_type;
      layout.column_order.push_back(ColumnRef::star());
      global.push_back(ColumnRef::star());
      continue;
    }
    if (t < 0 || static_cast<std::size_t>(t) >= tables.size())
      throw DanglingReference(db_id + ": column " + name + " refers to missing table index " + std::to_string(t));
    bool recognized = true;
    ColumnDef col;
    col.name = name;
    col.type = parse_column_type(raw_type, &recognized);
    col.raw_type = raw_type;
    if (!recognized) log_warning(db_id + ": unknown column type '" + raw_type + "' for " + name + ", using Other");
    if (display_columns) {
      const auto& d = display_columns->at(i);
      if (!d.is_array() || d.size() != 2 || !d[1].is_string())
        throw MalformedDocument(db_id + ": column_names entry must be [table_index, name]");
      col.display_name = d[1].get<std::string>();
    }
    ColumnRef ref{t, static_cast<int>(tables[t].columns.size())};
    tables[t].columns.push_back(std::move(col));
    layout.column_order.push_back(ref);
    global.push_back(ref);
  }

  auto resolve = [&](const json& v) -> ColumnRef {
    int idx = as_int(v, "column index");
    if (idx < 0 || static_cast<std::size_t>(idx) >= global.size() || global[idx].is_star())
      throw DanglingReference(db_id + ": key refers to missing column index " + std::to_string(idx));
    return global[idx];
  };

  for (const auto& pk : primary_keys) {
    std::vector<ColumnRef> parts;
    if (pk.is_array()) {
      for (const auto& p : pk) parts.push_back(resolve(p));
    } else {
      parts.push_back(resolve(pk));
    }
    if (parts.empty()) throw MalformedDocument(db_id + ": empty primary key entry");
    auto& table = tables[parts.front().table];
    if (table.primary_key) {
      log_info(db_id + ": additional primary key on " + table.name + " kept as a plain column");
    } else {
      table.primary_key = parts.front().column;
    }
    if (parts.size() > 1)
      log_info(db_id + ": composite primary key on " + table.name + "; using first column");
    layout.primary_keys.push_back(std::move(parts));
  }

  std::vector<ForeignKey> fks;
  for (const auto& fk : foreign_keys) {
    if (!fk.is_array() || fk.size() != 2) throw MalformedDocument(db_id + ": foreign key must be a pair");
    fks.push_back({resolve(fk[0]), resolve(fk[1])});
  }

  return DatabaseSchema::build(std::move(db_id), std::move(tables), std::move(fks), std::move(layout));
}

std::vector<DatabaseSchema> load_schemas(const json& doc) {
  std::vector<DatabaseSchema> out;
  if (doc.is_array()) {
    for (const auto& entry : doc) out.push_back(load_schema(entry));
  } else {
    out.push_back(load_schema(doc));
  }
  return out;
}

std::vector<DatabaseSchema> load_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedDocument("cannot open schema file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw MalformedDocument(path + ": " + e.what());
  }
  return load_schemas(doc);
}

json to_json(const DatabaseSchema& schema) {
  const auto& layout = schema.layout();
  std::map<ColumnRef, int> doc_index;
  json names = json::array(), types = json::array(), display = json::array();
  for (std::size_t i = 0; i < layout.column_order.size(); ++i) {
    ColumnRef ref = layout.column_order[i];
    doc_index[ref] = static_cast<int>(i);
    if (ref.is_star()) {
      names.push_back(json::array({-1, "*"}));
      display.push_back(json::array({-1, "*"}));
      types.push_back(layout.star_raw_type);
    } else {
      const auto& col = schema.column(ref);
      names.push_back(json::array({ref.table, col.name}));
      display.push_back(json::array({ref.table, col.display_name.value_or(col.name)}));
      types.push_back(col.raw_type.empty() ? text::to_lower(column_type_name(col.type)) : col.raw_type);
    }
  }
  json table_names = json::array(), table_display = json::array();
  for (const auto& t : schema.tables()) {
    table_names.push_back(t.name);
    table_display.push_back(t.display_name.value_or(t.name));
  }
  json pks = json::array();
  for (const auto& parts : layout.primary_keys) {
    if (parts.size() == 1) {
      pks.push_back(doc_index.at(parts.front()));
    } else {
      json arr = json::array();
      for (auto p : parts) arr.push_back(doc_index.at(p));
      pks.push_back(arr);
    }
  }
  json fks = json::array();
  for (const auto& fk : schema.foreign_keys())
    fks.push_back(json::array({doc_index.at(fk.child), doc_index.at(fk.parent)}));

  json out = {{"db_id", schema.db_id()},
              {"table_names_original", table_names},
              {"column_names_original", names},
              {"column_types", types},
              {"primary_keys", pks},
              {"foreign_keys", fks}};
  if (layout.has_display_names) {
    out["table_names"] = table_display;
    out["column_names"] = display;
  }
  return out;
}

ContentMap load_content(const json& doc) {
  if (!doc.is_object()) throw MalformedDocument("content document must be an object");
  ContentMap out;
  for (const auto& [key, values] : doc.items()) {
    if (!values.is_array()) throw MalformedDocument("content for " + key + " must be an array");
    auto& list = out[key];
    for (const auto& v : values) {
      if (v.is_string()) list.push_back(v.get<std::string>());
      else list.push_back(v.dump());
    }
  }
  return out;
}

ContentMap load_content_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedDocument("cannot open content file " + path);
  try {
    return load_content(json::parse(in));
  } catch (const json::parse_error& e) {
    throw MalformedDocument(path + ": " + e.what());
  }
}

SchemaCatalog::SchemaCatalog(std::vector<DatabaseSchema> schemas) : schemas_(std::move(schemas)) {
  for (std::size_t i = 0; i < schemas_.size(); ++i) {
    if (!index_.emplace(schemas_[i].db_id(), i).second)
      throw DuplicateName("duplicate db_id " + schemas_[i].db_id());
  }
}

const DatabaseSchema& SchemaCatalog::at(std::string_view db_id) const {
  const auto* s = find(db_id);
  if (!s) throw MalformedDocument("unknown db_id " + std::string(db_id));
  return *s;
}

const DatabaseSchema* SchemaCatalog::find(std::string_view db_id) const {
  auto it = index_.find(db_id);
  return it == index_.end() ? nullptr : &schemas_[it->second];
}

void SchemaCatalog::attach_content(const ContentMap& content) {
  std::map<std::string, ContentMap> per_db;
  for (const auto& [key, values] : content) {
    auto slash = key.find('/');
    if (slash == std::string::npos) {
      if (schemas_.size() != 1)
        throw MalformedDocument("content key '" + key + "' needs a db_id/ prefix");
      per_db[schemas_.front().db_id()][key] = values;
    } else {
      per_db[key.substr(0, slash)][key.substr(slash + 1)] = values;
    }
  }
  for (const auto& [db, map] : per_db) {
    auto it = index_.find(db);
    if (it == index_.end()) throw DanglingReference("content for unknown db_id " + db);
    schemas_[it->second] = schemas_[it->second].with_content(map);
  }
}

}  // namespace structsql
