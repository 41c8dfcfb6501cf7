#include "clausewise/schema.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "clausewise/errors.hpp"
#include "clausewise/text.hpp"

namespace clausewise {

using nlohmann::ordered_json;

const ColumnInfo* TableInfo::find_column(std::string_view column) const {
  for (const auto& c : columns)
    if (text::iequals(c.name, column)) return &c;
  return nullptr;
}

SchemaCatalog::SchemaCatalog(std::string id, std::vector<TableInfo> tables, std::vector<ForeignKey> foreign_keys,
                             std::map<std::string, std::string> readable_names)
    : id_(std::move(id)), tables_(std::move(tables)), foreign_keys_(std::move(foreign_keys)) {
  std::set<std::string> seen;
  for (std::size_t t = 0; t < tables_.size(); ++t) {
    const auto& table = tables_[t];
    if (table.name.empty())
      throw SchemaError(SchemaError::Kind::Malformed, "/tables/" + std::to_string(t), "empty table name");
    if (!seen.insert(text::lower(table.name)).second)
      throw SchemaError(SchemaError::Kind::DuplicateTable, "/tables/" + table.name, "duplicate table '" + table.name + "'");
    std::set<std::string> columns;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      if (!columns.insert(text::lower(table.columns[c].name)).second)
        throw SchemaError(SchemaError::Kind::DuplicateColumn, "/tables/" + table.name + "/" + std::to_string(c),
                          "duplicate column '" + table.columns[c].name + "' in table '" + table.name + "'");
    }
  }
  for (std::size_t i = 0; i < foreign_keys_.size(); ++i) {
    auto& fk = foreign_keys_[i];
    const auto location = "/foreign_keys/" + std::to_string(i);
    auto check = [&](std::string& table, std::string& column) {
      const TableInfo* t = find_table(table);
      if (!t) throw SchemaError(SchemaError::Kind::DanglingForeignKey, location, "foreign key names unknown table '" + table + "'");
      const ColumnInfo* c = t->find_column(column);
      if (!c)
        throw SchemaError(SchemaError::Kind::DanglingForeignKey, location,
                          "foreign key names unknown column '" + table + "." + column + "'");
      table = t->name;
      column = c->name;
    };
    check(fk.from_table, fk.from_column);
    check(fk.to_table, fk.to_column);
  }
  for (auto& [key, phrase] : readable_names) {
    const auto dot = key.find('.');
    const bool ok = dot == std::string::npos ? find_table(key) != nullptr
                                             : find_column(key.substr(0, dot), key.substr(dot + 1)) != nullptr;
    if (!ok)
      throw SchemaError(SchemaError::Kind::UnknownReadableName, "/readable_names/" + key,
                        "readable name for unknown entity '" + key + "'");
    readable_[text::lower(key)] = phrase;
  }
}

const TableInfo* SchemaCatalog::find_table(std::string_view table) const {
  for (const auto& t : tables_)
    if (text::iequals(t.name, table)) return &t;
  return nullptr;
}

const ColumnInfo* SchemaCatalog::find_column(std::string_view table, std::string_view column) const {
  const TableInfo* t = find_table(table);
  return t ? t->find_column(column) : nullptr;
}

std::string SchemaCatalog::table_phrase(std::string_view table) const {
  if (auto it = readable_.find(text::lower(table)); it != readable_.end()) return it->second;
  const TableInfo* t = find_table(table);
  return t ? t->name : std::string(table);
}

std::string SchemaCatalog::column_phrase(std::string_view table, std::string_view column) const {
  std::string key = text::lower(table) + "." + text::lower(column);
  if (auto it = readable_.find(key); it != readable_.end()) return it->second;
  const ColumnInfo* c = find_column(table, column);
  return c ? c->name : std::string(column);
}

bool SchemaCatalog::has_readable_name(std::string_view dotted) const { return readable_.count(text::lower(dotted)) > 0; }

namespace {

std::pair<std::string, std::string> split_dotted(const std::string& dotted, const std::string& location) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == dotted.size())
    throw SchemaError(SchemaError::Kind::Malformed, location, "expected a dotted table.column pair, got '" + dotted + "'");
  return {dotted.substr(0, dot), dotted.substr(dot + 1)};
}

ColumnInfo parse_column(const ordered_json& entry, const std::string& location) {
  if (entry.is_string()) return {entry.get<std::string>(), "text"};
  if (entry.is_array() && !entry.empty() && entry.size() <= 2 && entry[0].is_string()) {
    ColumnInfo c{entry[0].get<std::string>(), "text"};
    if (entry.size() == 2) {
      if (!entry[1].is_string()) throw SchemaError(SchemaError::Kind::Malformed, location + "/1", "type tag must be a string");
      c.type = entry[1].get<std::string>();
    }
    return c;
  }
  if (entry.is_object() && entry.contains("name") && entry["name"].is_string()) {
    ColumnInfo c{entry["name"].get<std::string>(), "text"};
    if (entry.contains("type")) {
      if (!entry["type"].is_string()) throw SchemaError(SchemaError::Kind::Malformed, location + "/type", "type tag must be a string");
      c.type = entry["type"].get<std::string>();
    }
    return c;
  }
  throw SchemaError(SchemaError::Kind::Malformed, location, "column entry must be a name, [name, type] or {name, type}");
}

}  // namespace

SchemaCatalog load_schema(const ordered_json& document, std::string id) {
  if (!document.is_object()) throw SchemaError(SchemaError::Kind::Malformed, "", "schema document must be a JSON object");
  if (id.empty() && document.contains("db_id") && document["db_id"].is_string()) id = document["db_id"].get<std::string>();
  if (!document.contains("tables") || !document["tables"].is_object())
    throw SchemaError(SchemaError::Kind::Malformed, "/tables", "missing 'tables' object");

  std::vector<TableInfo> tables;
  for (const auto& [name, columns] : document["tables"].items()) {
    const std::string location = "/tables/" + name;
    if (!columns.is_array()) throw SchemaError(SchemaError::Kind::Malformed, location, "column list must be an array");
    TableInfo table{name, {}};
    for (std::size_t i = 0; i < columns.size(); ++i) table.columns.push_back(parse_column(columns[i], location + "/" + std::to_string(i)));
    tables.push_back(std::move(table));
  }

  std::vector<ForeignKey> fks;
  if (document.contains("foreign_keys")) {
    const auto& list = document["foreign_keys"];
    if (!list.is_array()) throw SchemaError(SchemaError::Kind::Malformed, "/foreign_keys", "foreign_keys must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string location = "/foreign_keys/" + std::to_string(i);
      const auto& pair = list[i];
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
        throw SchemaError(SchemaError::Kind::Malformed, location, "foreign key must be a [from, to] pair of strings");
      auto [ft, fc] = split_dotted(pair[0].get<std::string>(), location + "/0");
      auto [tt, tc] = split_dotted(pair[1].get<std::string>(), location + "/1");
      fks.push_back({ft, fc, tt, tc});
    }
  }

  std::map<std::string, std::string> readable;
  if (document.contains("readable_names")) {
    const auto& names = document["readable_names"];
    if (!names.is_object()) throw SchemaError(SchemaError::Kind::Malformed, "/readable_names", "readable_names must be an object");
    for (const auto& [key, phrase] : names.items()) {
      if (!phrase.is_string()) throw SchemaError(SchemaError::Kind::Malformed, "/readable_names/" + key, "phrase must be a string");
      readable[key] = phrase.get<std::string>();
    }
  }
  return SchemaCatalog(std::move(id), std::move(tables), std::move(fks), std::move(readable));
}

SchemaCatalog load_schema_text(std::string_view text, std::string id) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(SchemaError::Kind::Malformed, "byte " + std::to_string(e.byte), e.what());
  }
  return load_schema(doc, std::move(id));
}

SchemaCatalog load_schema_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(SchemaError::Kind::Malformed, path.string(), "cannot open schema file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto doc_text = buffer.str();
  ordered_json doc;
  try {
    doc = ordered_json::parse(doc_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(SchemaError::Kind::Malformed, path.string() + ": byte " + std::to_string(e.byte), e.what());
  }
  std::string id;
  if (!(doc.is_object() && doc.contains("db_id"))) id = path.stem().string();
  return load_schema(doc, id);
}

ordered_json schema_document_from_spider(const nlohmann::json& entry) {
  ordered_json doc;
  doc["db_id"] = entry.at("db_id");
  const auto& table_names = entry.at("table_names_original");
  const auto& readable_tables = entry.contains("table_names") ? entry.at("table_names") : table_names;
  const auto& columns = entry.at("column_names_original");
  const auto& readable_columns = entry.contains("column_names") ? entry.at("column_names") : columns;
  const auto& types = entry.at("column_types");

  ordered_json tables = ordered_json::object();
  for (const auto& t : table_names) tables[t.get<std::string>()] = ordered_json::array();
  ordered_json readable = ordered_json::object();
  for (std::size_t t = 0; t < table_names.size(); ++t) {
    const auto name = table_names[t].get<std::string>();
    const auto phrase = readable_tables[t].get<std::string>();
    if (phrase != name) readable[name] = phrase;
  }
  auto dotted = [&](std::size_t col) {
    const auto tidx = columns[col][0].get<int>();
    return table_names[static_cast<std::size_t>(tidx)].get<std::string>() + "." + columns[col][1].get<std::string>();
  };
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const int tidx = columns[c][0].get<int>();
    if (tidx < 0) continue;  // the synthetic "*" column
    const auto table = table_names[static_cast<std::size_t>(tidx)].get<std::string>();
    const auto name = columns[c][1].get<std::string>();
    tables[table].push_back(ordered_json::array({name, types[c].get<std::string>()}));
    const auto phrase = readable_columns[c][1].get<std::string>();
    if (phrase != name) readable[table + "." + name] = phrase;
  }
  doc["tables"] = tables;
  ordered_json fks = ordered_json::array();
  for (const auto& fk : entry.at("foreign_keys"))
    fks.push_back(ordered_json::array({dotted(fk[0].get<std::size_t>()), dotted(fk[1].get<std::size_t>())}));
  doc["foreign_keys"] = fks;
  if (!readable.empty()) doc["readable_names"] = readable;
  return doc;
}

ordered_json to_json(const SchemaCatalog& schema) {
  ordered_json doc;
  doc["db_id"] = schema.id();
  ordered_json tables = ordered_json::object();
  ordered_json readable = ordered_json::object();
  for (const auto& t : schema.tables()) {
    ordered_json cols = ordered_json::array();
    for (const auto& c : t.columns) {
      cols.push_back(ordered_json::array({c.name, c.type}));
      if (schema.has_readable_name(t.name + "." + c.name)) readable[t.name + "." + c.name] = schema.column_phrase(t.name, c.name);
    }
    if (schema.has_readable_name(t.name)) readable[t.name] = schema.table_phrase(t.name);
    tables[t.name] = cols;
  }
  doc["tables"] = tables;
  ordered_json fks = ordered_json::array();
  for (const auto& fk : schema.foreign_keys())
    fks.push_back(ordered_json::array({fk.from_table + "." + fk.from_column, fk.to_table + "." + fk.to_column}));
  doc["foreign_keys"] = fks;
  if (!readable.empty()) doc["readable_names"] = readable;
  return doc;
}

std::string readable_name(std::string_view entity, const SchemaCatalog& schema) {
  const auto dot = entity.find('.');
  if (dot == std::string_view::npos) {
    if (!schema.find_table(entity))
      throw SchemaError(SchemaError::Kind::UnknownEntity, std::string(entity), "unknown table '" + std::string(entity) + "'");
    return schema.table_phrase(entity);
  }
  const auto table = entity.substr(0, dot);
  const auto column = entity.substr(dot + 1);
  if (!schema.find_column(table, column))
    throw SchemaError(SchemaError::Kind::UnknownEntity, std::string(entity), "unknown column '" + std::string(entity) + "'");
  return schema.column_phrase(table, column);
}

}  // namespace clausewise
