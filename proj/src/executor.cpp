#include "clausewise/executor.hpp"

#include <algorithm>

#include <sqlite3.h>

#include "clausewise/errors.hpp"
#include "clausewise/sql.hpp"

namespace clausewise {

SqliteExecutor::SqliteExecutor(const std::filesystem::path& database) {
  if (sqlite3_open_v2(database.string().c_str(), &db_, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK) {
    std::string message = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error("cannot open database '" + database.string() + "': " + message);
  }
}

SqliteExecutor::~SqliteExecutor() { sqlite3_close(db_); }

ResultSet SqliteExecutor::run(const SqlAst& query) {
  RenderOptions options;
  options.parenthesize_compounds = false;
  return run_sql(render_sql(query, options));
}

ResultSet SqliteExecutor::run_sql(const std::string& sql) {
  sqlite3_stmt* stmt = nullptr;
  if (sqlite3_prepare_v2(db_, sql.c_str(), -1, &stmt, nullptr) != SQLITE_OK)
    throw Error(std::string("SQLite rejected query: ") + sqlite3_errmsg(db_));
  ResultSet out;
  const int n = sqlite3_column_count(stmt);
  for (int i = 0; i < n; ++i) out.columns.emplace_back(sqlite3_column_name(stmt, i));
  int rc;
  while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
    std::vector<std::string> row;
    for (int i = 0; i < n; ++i) {
      const auto* v = sqlite3_column_text(stmt, i);
      row.emplace_back(v ? reinterpret_cast<const char*>(v) : "NULL");
    }
    out.rows.push_back(std::move(row));
  }
  sqlite3_finalize(stmt);
  if (rc != SQLITE_DONE) throw Error(std::string("SQLite failed: ") + sqlite3_errmsg(db_));
  return out;
}

bool same_results(const ResultSet& a, const ResultSet& b, bool ordered) {
  if (ordered) return a.rows == b.rows;
  auto x = a.rows;
  auto y = b.rows;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

}  // namespace clausewise
