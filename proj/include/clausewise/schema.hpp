#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace clausewise {

struct ColumnInfo {
  std::string name;
  std::string type;
};

struct TableInfo {
  std::string name;
  std::vector<ColumnInfo> columns;

  const ColumnInfo* find_column(std::string_view column) const;
};

/// A declared link from_table.from_column -> to_table.to_column.
struct ForeignKey {
  std::string from_table;
  std::string from_column;
  std::string to_table;
  std::string to_column;
};

/// Tables, columns, foreign keys and display phrases of one database.
///
/// Lookups are case-insensitive and return the schema's own spelling.
/// Instances are immutable once built and may be shared across threads.
class SchemaCatalog {
 public:
  SchemaCatalog() = default;

  /// Validates invariants; throws SchemaError on the first violation.
  SchemaCatalog(std::string id, std::vector<TableInfo> tables, std::vector<ForeignKey> foreign_keys,
                std::map<std::string, std::string> readable_names = {});

  const std::string& id() const noexcept { return id_; }
  const std::vector<TableInfo>& tables() const noexcept { return tables_; }
  const std::vector<ForeignKey>& foreign_keys() const noexcept { return foreign_keys_; }

  const TableInfo* find_table(std::string_view table) const;
  const ColumnInfo* find_column(std::string_view table, std::string_view column) const;

  /// Display phrase for a table, or its name when unmapped.
  std::string table_phrase(std::string_view table) const;
  /// Display phrase for table.column, or the column name when unmapped.
  std::string column_phrase(std::string_view table, std::string_view column) const;
  /// True when a readable phrase has been mapped for `dotted` ("t" or "t.c").
  bool has_readable_name(std::string_view dotted) const;

 private:
  std::string id_;
  std::vector<TableInfo> tables_;
  std::vector<ForeignKey> foreign_keys_;
  std::map<std::string, std::string> readable_;  // lowercased dotted id -> phrase
};

/// Parses the schema document format (see README). `id` defaults to the document's
/// `db_id` key when present.
SchemaCatalog load_schema(const nlohmann::ordered_json& document, std::string id = {});
SchemaCatalog load_schema_text(std::string_view text, std::string id = {});
/// Reads a schema file; the id defaults to the file stem.
SchemaCatalog load_schema_file(const std::filesystem::path& path);

/// Converts one entry of Spider's tables.json into the schema document format.
nlohmann::ordered_json schema_document_from_spider(const nlohmann::json& spider_entry);

nlohmann::ordered_json to_json(const SchemaCatalog& schema);

/// readable_name(entity) for a dotted identifier; throws SchemaError(UnknownEntity).
std::string readable_name(std::string_view entity, const SchemaCatalog& schema);

}  // namespace clausewise
