#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clausewise/clause_gen.hpp"
#include "clausewise/errors.hpp"
#include "clausewise/explain.hpp"
#include "clausewise/refine.hpp"
#include "clausewise/schema.hpp"
#include "clausewise/simulate.hpp"

namespace httplib {
class Server;
}

namespace clausewise {

struct ServiceConfig {
  /// Holds schemas/*.json and the sessions/ event logs.
  std::filesystem::path data_dir;
  std::string bind_host = "127.0.0.1";
  int port = 8080;
  /// Empty: the question is taken to be SQL.
  std::string text_to_sql_url;
  /// Empty: the rule-based clause generator.
  std::string clause_gen_url;
  std::chrono::milliseconds backend_timeout{10000};
  /// SQLite file, or a directory of {schema_id}.sqlite files, for result
  /// previews. Empty: no previews.
  std::filesystem::path executor_db;
};

/// Reads CLAUSEWISE_DATA_DIR, CLAUSEWISE_BIND (host:port),
/// CLAUSEWISE_TEXT_TO_SQL_URL, CLAUSEWISE_CLAUSE_GEN_URL, CLAUSEWISE_EXECUTOR_DB
/// and CLAUSEWISE_BACKEND_TIMEOUT_MS on top of `defaults`.
ServiceConfig config_from_env(ServiceConfig defaults = {});

/// Failure with the HTTP status it maps to.
class ServiceError : public Error {
 public:
  ServiceError(int status, std::string code, const std::string& message)
      : Error(message), status_(status), code_(std::move(code)) {}
  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }

 private:
  int status_;
  std::string code_;
};

/// Sessions and their event logs. Every accepted change is appended to
/// {data_dir}/sessions/{id}.jsonl before it is acknowledged; constructing a
/// store replays the logs found there. A change whose refinement fails is
/// rejected and leaves the session as it was.
class SessionStore {
 public:
  explicit SessionStore(ServiceConfig config);
  ~SessionStore();

  std::vector<std::string> schema_ids() const;
  const SchemaCatalog& schema(const std::string& id) const;

  /// body: {schema_id, paraphrase?, seed?}
  nlohmann::ordered_json create(const nlohmann::json& body);
  /// body: {text} (or {question})
  nlohmann::ordered_json ask(const std::string& id, const nlohmann::json& body);
  nlohmann::ordered_json get(const std::string& id) const;
  /// Step numbers are 1-based.
  nlohmann::ordered_json edit_step(const std::string& id, std::size_t step, const nlohmann::json& body);
  /// body: {text, position?}; inserts before `position` (default: append).
  nlohmann::ordered_json insert_step(const std::string& id, const nlohmann::json& body);
  nlohmann::ordered_json delete_step(const std::string& id, std::size_t step);

  /// {coherent, replay_matches}: the stored explanation is the explanation of
  /// the stored query, and re-running the logged changes from the question's
  /// query reproduces every recorded query.
  nlohmann::ordered_json verify(const std::string& id) const;

  std::vector<std::string> session_ids() const;

 private:
  struct Session;
  Session& find(const std::string& id) const;
  Explanation explanation_for(const std::string& schema_id, const SqlAst& query, bool paraphrased, std::uint64_t seed,
                              std::size_t turn) const;
  nlohmann::ordered_json state(const Session& s) const;
  nlohmann::ordered_json preview(const std::string& schema_id, const SqlAst& query) const;
  void append(Session& s, nlohmann::ordered_json& event);
  void apply(Session& s, const nlohmann::json& event);
  RefineResult run_change(const Session& s, const SqlAst& query, std::size_t turn, const nlohmann::json& event) const;
  nlohmann::ordered_json change(Session& s, nlohmann::ordered_json event);
  void replay(const std::filesystem::path& log);

  ServiceConfig config_;
  std::map<std::string, SchemaCatalog> schemas_;
  std::unique_ptr<ClauseGenerator> generator_;
  std::unique_ptr<TextToSqlBackend> text_to_sql_;
  mutable std::mutex mutex_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
};

/// HTTP front end:
///   GET    /health
///   GET    /schemas
///   POST   /sessions                      {schema_id, paraphrase?, seed?}
///   GET    /sessions/{id}
///   POST   /sessions/{id}/question        {text}
///   PUT    /sessions/{id}/steps/{n}       {text}
///   POST   /sessions/{id}/steps           {text, position?}
///   DELETE /sessions/{id}/steps/{n}
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  SessionStore& store() { return *store_; }
  /// Binds the configured address (port 0 picks a free one) and returns the port.
  int bind();
  /// Serves until stop(); call after bind().
  void serve();
  void stop();

 private:
  ServiceConfig config_;
  std::unique_ptr<SessionStore> store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace clausewise
