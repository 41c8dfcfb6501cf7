#include "clausewise/service.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>

#include <httplib.h>

#include "clausewise/errors.hpp"
#include "clausewise/executor.hpp"
#include "clausewise/sql.hpp"
#include "clausewise/text.hpp"

namespace clausewise {

ServiceConfig config_from_env(ServiceConfig config) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("CLAUSEWISE_DATA_DIR")) config.data_dir = *v;
  if (auto v = env("CLAUSEWISE_BIND")) {
    const auto colon = v->rfind(':');
    if (colon == std::string::npos) {
      config.bind_host = *v;
    } else {
      config.bind_host = v->substr(0, colon);
      config.port = std::stoi(v->substr(colon + 1));
    }
  }
  if (auto v = env("CLAUSEWISE_TEXT_TO_SQL_URL")) config.text_to_sql_url = *v;
  if (auto v = env("CLAUSEWISE_CLAUSE_GEN_URL")) config.clause_gen_url = *v;
  if (auto v = env("CLAUSEWISE_EXECUTOR_DB")) config.executor_db = *v;
  if (auto v = env("CLAUSEWISE_BACKEND_TIMEOUT_MS")) config.backend_timeout = std::chrono::milliseconds(std::stoll(*v));
  return config;
}

struct SessionStore::Session {
  std::string id;
  std::string schema_id;
  bool paraphrase = false;
  std::uint64_t seed = 0;
  std::string created_at;
  std::string updated_at;
  std::string question;
  std::optional<SqlAst> query;
  Explanation shown;
  /// Accepted step changes since the last question, as logged.
  nlohmann::ordered_json history = nlohmann::ordered_json::array();
  nlohmann::ordered_json outcomes = nlohmann::ordered_json::array();
  std::size_t turn = 0;
  std::size_t version = 0;
  std::filesystem::path log_path;
  std::mutex mutex;
};

namespace {

std::string new_id() {
  static std::mutex m;
  static std::mt19937_64 rng(std::random_device{}());
  std::lock_guard lock(m);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < 2; ++i) {
    const auto v = rng();
    for (int b = 0; b < 16; ++b) out.push_back(hex[(v >> (b * 4)) & 0xF]);
  }
  return out;
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string required_string(const nlohmann::json& body, std::initializer_list<const char*> keys) {
  for (const char* key : keys)
    if (body.is_object() && body.contains(key) && body[key].is_string()) return body[key].get<std::string>();
  throw ServiceError(400, "bad_request", std::string("request needs a string field '") + *keys.begin() + "'");
}

}  // namespace

SessionStore::SessionStore(ServiceConfig config) : config_(std::move(config)) {
  const auto schema_dir = config_.data_dir / "schemas";
  if (std::filesystem::is_directory(schema_dir)) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(schema_dir))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto s = load_schema_file(f);
      schemas_.emplace(s.id(), std::move(s));
    }
  }
  if (config_.clause_gen_url.empty()) generator_ = std::make_unique<RuleBasedGenerator>();
  else generator_ = std::make_unique<RemoteGenerator>(config_.clause_gen_url, config_.backend_timeout);
  if (config_.text_to_sql_url.empty()) text_to_sql_ = std::make_unique<LiteralSqlBackend>();
  else text_to_sql_ = std::make_unique<RemoteTextToSql>(config_.text_to_sql_url, config_.backend_timeout);

  const auto session_dir = config_.data_dir / "sessions";
  if (std::filesystem::is_directory(session_dir)) {
    std::vector<std::filesystem::path> logs;
    for (const auto& e : std::filesystem::directory_iterator(session_dir))
      if (e.path().extension() == ".jsonl") logs.push_back(e.path());
    std::sort(logs.begin(), logs.end());
    for (const auto& log : logs) replay(log);
  }
}

SessionStore::~SessionStore() = default;

std::vector<std::string> SessionStore::schema_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : schemas_) out.push_back(id);
  return out;
}

const SchemaCatalog& SessionStore::schema(const std::string& id) const {
  auto it = schemas_.find(id);
  if (it == schemas_.end()) throw ServiceError(404, "unknown_schema", "no schema '" + id + "'");
  return it->second;
}

std::vector<std::string> SessionStore::session_ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

SessionStore::Session& SessionStore::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "unknown_session", "no session '" + id + "'");
  return *it->second;
}

Explanation SessionStore::explanation_for(const std::string& schema_id, const SqlAst& query, bool paraphrased,
                                          std::uint64_t seed, std::size_t turn) const {
  Explanation shown = explain_query(decompose(query), schema(schema_id));
  if (paraphrased)
    for (auto& step : shown.steps)
      if (step.kind) step = paraphrase(step, seed * 1000003ULL + turn * 1009ULL + step.index);
  return shown;
}

nlohmann::ordered_json SessionStore::state(const Session& s) const {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["schema_id"] = s.schema_id;
  j["version"] = s.version;
  j["created_at"] = s.created_at;
  j["updated_at"] = s.updated_at;
  j["question"] = s.question;
  j["sql"] = s.query ? render_sql(*s.query) : "";
  auto& steps = j["steps"];
  steps = nlohmann::ordered_json::array();
  for (const auto& step : s.shown.steps) steps.push_back(to_json(step));
  j["nesting_depth"] = s.query ? s.shown.nesting_depth : 0;
  j["deep_nesting"] = s.query ? s.shown.deep_nesting() : false;
  j["outcomes"] = s.outcomes;
  j["history"] = s.history;
  if (s.query && !config_.executor_db.empty()) j["result"] = preview(s.schema_id, *s.query);
  return j;
}

nlohmann::ordered_json SessionStore::preview(const std::string& schema_id, const SqlAst& query) const {
  std::filesystem::path db = config_.executor_db;
  if (std::filesystem::is_directory(db)) db /= schema_id + ".sqlite";
  nlohmann::ordered_json j;
  try {
    SqliteExecutor executor(db);
    const auto rows = executor.run(query);
    j["columns"] = rows.columns;
    auto& out = j["rows"];
    out = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < rows.rows.size() && i < 50; ++i) out.push_back(rows.rows[i]);
    j["truncated"] = rows.rows.size() > 50;
  } catch (const Error& e) {
    j["error"] = e.what();
  }
  return j;
}

void SessionStore::append(Session& s, nlohmann::ordered_json& event) {
  event["seq"] = s.version + 1;
  event["time"] = now_utc();
  std::ofstream out(s.log_path, std::ios::app);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw ServiceError(500, "storage", "cannot write session log '" + s.log_path.string() + "'");
}

nlohmann::ordered_json SessionStore::create(const nlohmann::json& body) {
  const std::string schema_id = required_string(body, {"schema_id"});
  schema(schema_id);
  auto s = std::make_unique<Session>();
  s->id = new_id();
  s->schema_id = schema_id;
  s->paraphrase = body.value("paraphrase", false);
  s->seed = body.value("seed", std::uint64_t{0});
  std::filesystem::create_directories(config_.data_dir / "sessions");
  s->log_path = config_.data_dir / "sessions" / (s->id + ".jsonl");
  nlohmann::ordered_json event{{"type", "created"}, {"id", s->id}, {"schema_id", schema_id},
                               {"paraphrase", s->paraphrase}, {"seed", s->seed}};
  append(*s, event);
  apply(*s, event);
  std::lock_guard lock(mutex_);
  auto& ref = *s;
  sessions_.emplace(ref.id, std::move(s));
  return state(ref);
}

nlohmann::ordered_json SessionStore::get(const std::string& id) const {
  Session& s = find(id);
  std::lock_guard lock(s.mutex);
  return state(s);
}

nlohmann::ordered_json SessionStore::ask(const std::string& id, const nlohmann::json& body) {
  const std::string question = required_string(body, {"text", "question"});
  Session& s = find(id);
  std::lock_guard lock(s.mutex);
  const auto& sc = schema(s.schema_id);
  std::string sql;
  try {
    sql = text_to_sql_->predict(question, sc);
  } catch (const SqlSyntaxError& e) {
    throw ServiceError(422, "unparseable_sql", e.what());
  } catch (const ResolutionError& e) {
    throw ServiceError(422, "unknown_entity", e.what());
  } catch (const Error& e) {
    throw ServiceError(502, "text_to_sql_failed", e.what());
  }
  SqlAst query;
  try {
    query = parse_sql(sql, sc);
    explanation_for(s.schema_id, query, false, 0, 0);
  } catch (const Error& e) {
    std::cerr << "clausewise: text-to-SQL output rejected: " << sql << "\n";
    throw ServiceError(422, "invalid_backend_sql", std::string("predicted SQL rejected: ") + e.what());
  }
  nlohmann::ordered_json event{{"type", "question"}, {"question", question}, {"sql", render_sql(query)}};
  append(s, event);
  apply(s, event);
  return state(s);
}

nlohmann::ordered_json SessionStore::edit_step(const std::string& id, std::size_t step, const nlohmann::json& body) {
  return change(find(id), {{"type", "edit"}, {"step", step}, {"text", required_string(body, {"text"})}});
}

nlohmann::ordered_json SessionStore::insert_step(const std::string& id, const nlohmann::json& body) {
  nlohmann::ordered_json event{{"type", "insert"}, {"text", required_string(body, {"text"})}};
  if (body.contains("position") && !body["position"].is_null()) {
    if (!body["position"].is_number_integer() || body["position"].get<std::int64_t>() < 1)
      throw ServiceError(400, "bad_request", "position must be a positive integer");
    event["position"] = body["position"].get<std::size_t>();
  }
  return change(find(id), event);
}

nlohmann::ordered_json SessionStore::delete_step(const std::string& id, std::size_t step) {
  return change(find(id), {{"type", "delete"}, {"step", step}});
}

RefineResult SessionStore::run_change(const Session& s, const SqlAst& query, std::size_t turn,
                                      const nlohmann::json& event) const {
  const Explanation shown = explanation_for(s.schema_id, query, s.paraphrase, s.seed, turn);
  StepDocument doc = StepDocument::from(shown);
  const std::string type = event.at("type");
  const std::size_t size = doc.entries.size();
  if (type == "insert") {
    const std::size_t position = event.at("position");
    if (position < 1 || position > size + 1)
      throw ServiceError(404, "unknown_step", "position must be between 1 and " + std::to_string(size + 1));
    doc.insert(position - 1, event.at("text"));
  } else {
    const std::size_t step = event.at("step");
    if (step < 1 || step > size) throw ServiceError(404, "unknown_step", "no step " + std::to_string(step));
    if (type == "edit") doc.edit(step - 1, event.at("text"));
    else doc.erase(step - 1);
  }
  try {
    auto result = refine(shown, doc, schema(s.schema_id), *generator_);
    explain_query(decompose(result.query), schema(s.schema_id));
    return result;
  } catch (const StepError& e) {
    if (e.retryable()) throw ServiceError(502, "clause_generator_failed", e.what());
    const std::string code = e.stage() == "generation" ? "generation_failed"
                             : e.stage() == "structure" ? "invalid_structure"
                                                        : "composition_failed";
    throw ServiceError(422, code, e.what());
  } catch (const ExplainError& e) {
    throw ServiceError(422, "unexplainable", e.what());
  }
}

nlohmann::ordered_json SessionStore::change(Session& s, nlohmann::ordered_json event) {
  std::lock_guard lock(s.mutex);
  if (!s.query) throw ServiceError(409, "no_query", "ask a question before changing steps");
  if (event["type"] == "insert" && !event.contains("position")) event["position"] = s.shown.steps.size() + 1;
  if (event["type"] == "edit") {
    const std::size_t step = event["step"];
    if (step >= 1 && step <= s.shown.steps.size() && s.shown.steps[step - 1].text == event["text"]) return state(s);
  }
  const auto result = run_change(s, *s.query, s.turn, event);
  event["sql"] = render_sql(result.query);
  auto outcomes = nlohmann::ordered_json::array();
  for (const auto& o : result.outcomes) outcomes.push_back(to_json(o));
  event["outcomes"] = outcomes;
  append(s, event);
  apply(s, event);
  return state(s);
}

void SessionStore::apply(Session& s, const nlohmann::json& event) {
  const std::string type = event.at("type");
  ++s.version;
  s.updated_at = event.value("time", "");
  if (type == "created") {
    s.created_at = s.updated_at;
    return;
  }
  const auto& sc = schema(s.schema_id);
  s.query = parse_sql(event.at("sql").get<std::string>(), sc);
  ++s.turn;
  s.shown = explanation_for(s.schema_id, *s.query, s.paraphrase, s.seed, s.turn);
  if (type == "question") {
    s.question = event.at("question");
    s.history = nlohmann::ordered_json::array();
    s.outcomes = nlohmann::ordered_json::array();
    return;
  }
  nlohmann::ordered_json entry;
  entry["type"] = type;
  if (event.contains("step")) entry["step"] = event["step"];
  if (event.contains("position")) entry["position"] = event["position"];
  if (event.contains("text")) entry["text"] = event["text"];
  entry["sql"] = event["sql"];
  entry["outcomes"] = event.at("outcomes");
  s.history.push_back(entry);
  s.outcomes = event.at("outcomes");
}

nlohmann::ordered_json SessionStore::verify(const std::string& id) const {
  Session& s = find(id);
  std::lock_guard lock(s.mutex);
  nlohmann::ordered_json j;
  if (!s.query) {
    j["coherent"] = s.shown.steps.empty();
    j["replay_matches"] = true;
    return j;
  }
  const Explanation fresh = explanation_for(s.schema_id, *s.query, s.paraphrase, s.seed, s.turn);
  j["coherent"] = fresh.steps == s.shown.steps && fresh.tree == s.shown.tree;

  // Re-run every recorded change from the question's query.
  const auto& sc = schema(s.schema_id);
  std::ifstream in(s.log_path);
  std::string line;
  std::optional<SqlAst> query;
  std::size_t turn = 0;
  bool all_equal = true;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    nlohmann::json event;
    try {
      event = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      break;
    }
    const std::string type = event.at("type");
    if (type == "created") continue;
    ++turn;
    if (type == "question") {
      query = parse_sql(event.at("sql").get<std::string>(), sc);
      continue;
    }
    try {
      const auto result = run_change(s, *query, turn - 1, event);
      all_equal = all_equal && render_sql(result.query) == event.at("sql").get<std::string>();
      query = result.query;
    } catch (const ServiceError&) {
      all_equal = false;
    }
  }
  j["replay_matches"] = all_equal && query && render_sql(*query) == render_sql(*s.query);
  return j;
}

void SessionStore::replay(const std::filesystem::path& log) {
  std::ifstream in(log);
  std::vector<nlohmann::json> events;
  std::string line;
  std::uintmax_t good = 0;
  bool torn = false;
  while (std::getline(in, line)) {
    if (!text::trim(line).empty()) {
      try {
        events.push_back(nlohmann::json::parse(line));
      } catch (const nlohmann::json::exception&) {
        // A torn final line from an interrupted write. Cut it off so later
        // appends start on a clean line.
        torn = true;
        break;
      }
    }
    good = in.eof() ? good + line.size() : good + line.size() + 1;
  }
  in.close();
  if (torn) {
    std::cerr << "clausewise: dropping unreadable tail of " << log << "\n";
    std::filesystem::resize_file(log, good);
  }
  if (events.empty() || events.front().value("type", "") != "created") {
    std::cerr << "clausewise: " << log << " does not start with a created event; skipped\n";
    return;
  }
  auto s = std::make_unique<Session>();
  const auto& created = events.front();
  s->id = created.at("id");
  s->schema_id = created.at("schema_id");
  s->paraphrase = created.value("paraphrase", false);
  s->seed = created.value("seed", std::uint64_t{0});
  s->log_path = log;
  try {
    schema(s->schema_id);
    for (const auto& e : events) apply(*s, e);
  } catch (const std::exception& e) {
    std::cerr << "clausewise: cannot replay " << log << ": " << e.what() << "\n";
    return;
  }
  std::lock_guard lock(mutex_);
  sessions_.emplace(s->id, std::move(s));
}

// ---------------------------------------------------------------------------

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_json(res, e.status(), {{"error", {{"code", e.code()}, {"message", e.what()}}}});
    } catch (const nlohmann::json::exception& e) {
      send_json(res, 400, {{"error", {{"code", "bad_request"}, {"message", e.what()}}}});
    } catch (const Error& e) {
      send_json(res, 422, {{"error", {{"code", "unprocessable"}, {"message", e.what()}}}});
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", {{"code", "internal"}, {"message", e.what()}}}});
    }
  };
}

nlohmann::json body_of(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  return nlohmann::json::parse(req.body);
}

std::size_t step_number(const std::string& s) {
  try {
    return static_cast<std::size_t>(std::stoull(s));
  } catch (const std::exception&) {
    throw ServiceError(400, "bad_request", "step number '" + s + "' is not a number");
  }
}

}  // namespace

Service::Service(ServiceConfig config)
    : config_(std::move(config)),
      store_(std::make_unique<SessionStore>(config_)),
      server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  auto& store = *store_;
  srv.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) { send_json(res, 200, {{"status", "ok"}}); }));
  srv.Get("/schemas", guarded([&store](const httplib::Request&, httplib::Response& res) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& id : store.schema_ids()) out.push_back(to_json(store.schema(id)));
    send_json(res, 200, out);
  }));
  srv.Post("/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 201, store.create(body_of(req)));
  }));
  srv.Get(R"(/sessions/([0-9a-f]+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, store.get(req.matches[1]));
  }));
  srv.Post(R"(/sessions/([0-9a-f]+)/question)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, store.ask(req.matches[1], body_of(req)));
  }));
  srv.Put(R"(/sessions/([0-9a-f]+)/steps/(\d+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, store.edit_step(req.matches[1], step_number(req.matches[2]), body_of(req)));
  }));
  srv.Post(R"(/sessions/([0-9a-f]+)/steps)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, store.insert_step(req.matches[1], body_of(req)));
  }));
  srv.Delete(R"(/sessions/([0-9a-f]+)/steps/(\d+))", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, store.delete_step(req.matches[1], step_number(req.matches[2])));
  }));
}

Service::~Service() = default;

int Service::bind() {
  if (config_.port == 0) {
    const int port = server_->bind_to_any_port(config_.bind_host);
    if (port < 0) throw Error("cannot bind " + config_.bind_host);
    return port;
  }
  if (!server_->bind_to_port(config_.bind_host, config_.port))
    throw Error("cannot bind " + config_.bind_host + ":" + std::to_string(config_.port));
  return config_.port;
}

void Service::serve() { server_->listen_after_bind(); }

void Service::stop() { server_->stop(); }

}  // namespace clausewise
