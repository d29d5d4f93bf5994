#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace structsql {

enum class ColumnType { Integer, Real, Text, Date, Boolean, Other };

/// Mark spelling of a column type ("Integer", "Real", ...).
std::string_view column_type_name(ColumnType type);

/// Maps a dataset type label onto the closed enum. Unknown labels map to
/// Other and set *recognized to false.
ColumnType parse_column_type(std::string_view raw, bool* recognized = nullptr);

/// Position of a column inside a schema. table == -1 denotes the schema-wide
/// "*" pseudo-column.
struct ColumnRef {
  int table = -1;
  int column = -1;

  bool is_star() const { return table < 0; }
  static ColumnRef star() { return {}; }
  auto operator<=>(const ColumnRef&) const = default;
};

struct ColumnDef {
  std::string name;
  ColumnType type = ColumnType::Other;
  std::string raw_type;  // label as it appeared in the source document
  bool is_primary = false;
  /// Absent means no content is known; an empty list means known-empty.
  std::optional<std::vector<std::string>> sample_values;
  std::optional<std::string> display_name;
};

struct TableDef {
  std::string name;
  std::optional<std::string> display_name;
  std::vector<ColumnDef> columns;
  std::optional<int> primary_key;  // column index within this table
};

struct ForeignKey {
  ColumnRef child;
  ColumnRef parent;
  bool operator==(const ForeignKey&) const = default;
};

/// Map of "Table.Column" to the cell values stored for that column.
using ContentMap = std::map<std::string, std::vector<std::string>>;

/// A validated relational schema. Immutable once built; identifier lookups are
/// case-insensitive while the original spelling is kept for rendering.
class DatabaseSchema {
 public:
  /// Document bookkeeping needed to write the schema back out unchanged.
  struct SourceLayout {
    std::vector<ColumnRef> column_order;                // includes the star entry
    std::vector<std::vector<ColumnRef>> primary_keys;   // composite keys keep all parts
    std::string star_raw_type = "text";
    bool has_display_names = false;
  };

  /// Validates and builds. Throws DuplicateName or DanglingReference.
  static DatabaseSchema build(std::string db_id, std::vector<TableDef> tables,
                              std::vector<ForeignKey> foreign_keys,
                              std::optional<SourceLayout> layout = std::nullopt);

  const std::string& db_id() const { return db_id_; }
  std::span<const TableDef> tables() const { return tables_; }
  const TableDef& table(int index) const { return tables_.at(static_cast<std::size_t>(index)); }
  const ColumnDef& column(ColumnRef ref) const;
  std::span<const ForeignKey> foreign_keys() const { return foreign_keys_; }
  const SourceLayout& layout() const { return layout_; }

  std::size_t table_count() const { return tables_.size(); }
  /// Number of real columns, excluding "*".
  std::size_t column_count() const;
  /// All real columns in table order.
  std::vector<ColumnRef> all_columns() const;

  std::optional<int> find_table(std::string_view name) const;
  std::optional<ColumnRef> find_column(int table, std::string_view name) const;
  /// "Table.Column", or "*" for the pseudo-column.
  std::string qualified_name(ColumnRef ref) const;

  bool has_sample_values() const;

  /// Copy with sample values attached. Keys must name existing columns.
  DatabaseSchema with_content(const ContentMap& content) const;

 private:
  DatabaseSchema() = default;

  std::string db_id_;
  std::vector<TableDef> tables_;
  std::vector<ForeignKey> foreign_keys_;
  SourceLayout layout_;
};

/// Parses one Spider-format schema entry.
DatabaseSchema load_schema(const nlohmann::json& doc);
/// Parses a Spider tables document (an array of entries).
std::vector<DatabaseSchema> load_schemas(const nlohmann::json& doc);
std::vector<DatabaseSchema> load_schema_file(const std::string& path);

/// Writes the schema back to the Spider entry format.
nlohmann::json to_json(const DatabaseSchema& schema);

ContentMap load_content(const nlohmann::json& doc);
ContentMap load_content_file(const std::string& path);

/// db_id keyed collection with lookup that throws MalformedDocument on miss.
class SchemaCatalog {
 public:
  SchemaCatalog() = default;
  explicit SchemaCatalog(std::vector<DatabaseSchema> schemas);

  const DatabaseSchema& at(std::string_view db_id) const;
  const DatabaseSchema* find(std::string_view db_id) const;
  std::size_t size() const { return schemas_.size(); }
  std::span<const DatabaseSchema> schemas() const { return schemas_; }

  /// Attaches per-database content. Keys are "db_id/Table.Column" or, when a
  /// single database is loaded, plain "Table.Column".
  void attach_content(const ContentMap& content);

 private:
  std::vector<DatabaseSchema> schemas_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace structsql
