#pragma once

#include <string>

#include "clausewise/schema.hpp"

namespace clausewise::fixtures {

inline std::string data_path(const std::string& relative) { return std::string(CLAUSEWISE_DATA_DIR) + "/" + relative; }

inline const SchemaCatalog& schema(const std::string& db_id) {
  static const SchemaCatalog concert = load_schema_file(data_path("schemas/concert_singer.json"));
  static const SchemaCatalog college = load_schema_file(data_path("schemas/college.json"));
  static const SchemaCatalog flights = load_schema_file(data_path("schemas/flight_network.json"));
  if (db_id == "college") return college;
  if (db_id == "flight_network") return flights;
  return concert;
}

/// The two-table schema used throughout the worked examples.
inline const SchemaCatalog& mini_schema() {
  static const SchemaCatalog mini = load_schema_text(R"({
    "db_id": "mini",
    "tables": {
      "singer": [["name", "text"], ["age", "number"]],
      "concert": [["venue", "text"], ["singer_name", "text"]]
    },
    "foreign_keys": [["concert.singer_name", "singer.name"]]
  })");
  return mini;
}

}  // namespace clausewise::fixtures
