#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "clausewise/ast.hpp"

struct sqlite3;

namespace clausewise {

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;  // NULL is rendered as "NULL"
};

/// Runs queries against an SQLite database file, opened read-only.
class SqliteExecutor {
 public:
  explicit SqliteExecutor(const std::filesystem::path& database);
  ~SqliteExecutor();
  SqliteExecutor(const SqliteExecutor&) = delete;
  SqliteExecutor& operator=(const SqliteExecutor&) = delete;

  ResultSet run(const SqlAst& query);
  ResultSet run_sql(const std::string& sql);

 private:
  sqlite3* db_ = nullptr;
};

/// Same rows; in order when `ordered`, otherwise as multisets.
bool same_results(const ResultSet& a, const ResultSet& b, bool ordered);

}  // namespace clausewise
