#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clausewise/clause_gen.hpp"
#include "clausewise/decompose.hpp"
#include "clausewise/errors.hpp"
#include "clausewise/evaluator.hpp"
#include "clausewise/explain.hpp"
#include "clausewise/refine.hpp"
#include "clausewise/schema.hpp"
#include "clausewise/service.hpp"
#include "clausewise/simulate.hpp"
#include "clausewise/sql.hpp"

namespace fs = std::filesystem;
using namespace clausewise;

namespace {

/// Exit codes: 1 bad input, 2 usage (CLI11's own), 3 refinement failed.
struct CliError : std::runtime_error {
  int code;
  CliError(const std::string& message, int code = 1) : std::runtime_error(message), code(code) {}
};

fs::path default_schema_location() {
  if (const char* dir = std::getenv("CLAUSEWISE_DATA_DIR")) return fs::path(dir) / "schemas";
  return fs::path(CLAUSEWISE_DATA_DIR) / "schemas";
}

/// Schemas from a file or every *.json in a directory, keyed by id.
class Schemas {
 public:
  explicit Schemas(const fs::path& location) {
    if (!fs::exists(location)) throw CliError("schema location not found: " + location.string());
    if (fs::is_directory(location)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(location))
        if (e.path().extension() == ".json") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) add(load_schema_file(f));
    } else {
      add(load_schema_file(location));
    }
    if (by_id_.empty()) throw CliError("no schemas in " + location.string());
  }

  const SchemaCatalog& get(const std::string& id) const {
    if (id.empty() && by_id_.size() == 1) return by_id_.begin()->second;
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw CliError("unknown schema '" + id + "'");
    return it->second;
  }

 private:
  void add(SchemaCatalog s) {
    auto id = s.id();
    by_id_.emplace(std::move(id), std::move(s));
  }
  std::map<std::string, SchemaCatalog> by_id_;
};

std::string read_sql_argument(const std::string& arg) {
  if (fs::is_regular_file(arg)) {
    std::ifstream in(arg);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  return arg;
}

bool on_off(const std::string& v) { return v == "on"; }

std::unique_ptr<ClauseGenerator> make_generator(const std::string& url) {
  if (url.empty()) return std::make_unique<RuleBasedGenerator>();
  return std::make_unique<RemoteGenerator>(url);
}

Explanation shown_explanation(const SqlAst& query, const SchemaCatalog& schema, bool paraphrased, std::uint64_t seed) {
  auto shown = explain_query(decompose(query), schema);
  if (paraphrased)
    for (auto& step : shown.steps)
      if (step.kind) step = paraphrase(step, seed * 1000003ULL + step.index);
  return shown;
}

void print_steps(const Explanation& e) {
  for (const auto& step : e.steps) std::cout << step.index << ". " << step.text << "\n";
}

// ---------------------------------------------------------------------------

struct ExplainArgs {
  std::string query;
  std::string schema;
  std::string db_id;
  bool json = false;
  std::string paraphrase = "off";
  std::uint64_t seed = 0;
};

int cmd_explain(const ExplainArgs& a) {
  Schemas schemas(a.schema.empty() ? default_schema_location() : fs::path(a.schema));
  const auto& schema = schemas.get(a.db_id);
  const auto query = parse_sql(read_sql_argument(a.query), schema);
  const auto shown = shown_explanation(query, schema, on_off(a.paraphrase), a.seed);
  if (a.json) {
    auto j = to_json(shown);
    j["sql"] = render_sql(query);
    std::cout << j.dump(2) << "\n";
  } else {
    print_steps(shown);
  }
  return 0;
}

struct EditArgs {
  std::string query;
  std::size_t step = 0;
  std::string text;
  std::string schema;
  std::string db_id;
  std::string generator;
  bool json = false;
  bool insert = false;
  bool remove = false;
};

int cmd_edit(const EditArgs& a) {
  Schemas schemas(a.schema.empty() ? default_schema_location() : fs::path(a.schema));
  const auto& schema = schemas.get(a.db_id);
  const auto query = parse_sql(read_sql_argument(a.query), schema);
  const auto shown = explain_query(decompose(query), schema);
  auto doc = StepDocument::from(shown);
  const std::size_t n = doc.entries.size();
  if (a.insert) {
    if (a.step < 1 || a.step > n + 1) throw CliError("step must be between 1 and " + std::to_string(n + 1));
    doc.insert(a.step - 1, a.text);
  } else {
    if (a.step < 1 || a.step > n) throw CliError("step must be between 1 and " + std::to_string(n));
    if (a.remove) doc.erase(a.step - 1);
    else doc.edit(a.step - 1, a.text);
  }
  auto generator = make_generator(a.generator);
  RefineResult result;
  try {
    result = refine(shown, doc, schema, *generator);
  } catch (const StepError& e) {
    throw CliError(e.what(), 3);
  }
  const auto& touched = result.outcomes[a.remove ? 0 : a.step - 1];
  const auto updated = explain_query(decompose(result.query), schema);
  if (a.json) {
    nlohmann::ordered_json j;
    j["sql"] = render_sql(result.query);
    if (!a.remove) j["path"] = std::string(to_string(touched.path));
    auto& oc = j["outcomes"];
    oc = nlohmann::ordered_json::array();
    for (const auto& o : result.outcomes) oc.push_back(to_json(o));
    j["explanation"] = to_json(updated);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << render_sql(result.query) << "\n";
    if (!a.remove) std::cout << "path=" << to_string(touched.path) << "\n";
    print_steps(updated);
  }
  return 0;
}

struct SimulateArgs {
  std::string corpus;
  std::string schema;
  std::string backend = "stub";
  std::string generator;
  int rounds = 3;
  std::string paraphrase = "off";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string database;
  std::string trace;
  bool json = false;
};

std::string percent(std::size_t n, std::size_t d) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << (d ? 100.0 * static_cast<double>(n) / static_cast<double>(d) : 0.0);
  return out.str();
}

void print_table(const AccuracyReport& r) {
  std::vector<std::vector<std::string>> rows{{"metric", "count", "before", "after"}};
  rows.push_back({"exact match", std::to_string(r.total), percent(r.exact_before, r.total), percent(r.exact_after, r.total)});
  for (const auto& [name, counts] : r.components)
    rows.push_back({"  " + name, std::to_string(r.total), percent(counts.first, r.total), percent(counts.second, r.total)});
  for (const auto& [name, b] : r.by_difficulty)
    rows.push_back({"difficulty " + name, std::to_string(b.total), percent(b.exact_before, b.total), percent(b.exact_after, b.total)});
  if (r.execution)
    rows.push_back({"execution", std::to_string(r.executed), percent(r.execution->first, r.executed),
                    percent(r.execution->second, r.executed)});
  std::vector<std::size_t> width(4, 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  for (const auto& row : rows) {
    std::cout << std::left << std::setw(static_cast<int>(width[0])) << row[0];
    for (std::size_t c = 1; c < row.size(); ++c) std::cout << "  " << std::right << std::setw(static_cast<int>(width[c])) << row[c];
    std::cout << "\n";
  }
  std::cout << "errors: " << r.errors << "\n";
  std::cout << "rounds:";
  for (const auto& [n, count] : r.rounds) std::cout << " " << n << "=" << count;
  std::cout << "\n";
}

int cmd_simulate(const SimulateArgs& a) {
  if (!fs::is_regular_file(a.corpus)) throw CliError("corpus not found: " + a.corpus);
  const auto items = load_corpus(a.corpus);
  Schemas schemas(a.schema.empty() ? default_schema_location() : fs::path(a.schema));

  Predictor predict;
  if (a.backend == "stub") {
    predict = corrupting_predictor(a.seed);
  } else if (a.backend == "corpus") {
    predict = [](const CorpusItem& item, std::size_t, const SchemaCatalog&) { return item.predicted_sql.value_or(item.gold_sql); };
  } else if (a.backend.rfind("http://", 0) == 0 || a.backend.rfind("https://", 0) == 0) {
    predict = [url = a.backend](const CorpusItem& item, std::size_t, const SchemaCatalog& schema) {
      RemoteTextToSql backend(url);
      return backend.predict(item.question, schema);
    };
  } else {
    throw CliError("--backend must be stub, corpus or an http(s) URL");
  }

  CorpusRunOptions options;
  options.loop.max_rounds = a.rounds;
  options.loop.paraphrase = on_off(a.paraphrase);
  options.loop.seed = a.seed;
  options.threads = a.threads;
  options.database = a.database;
  const auto run = run_corpus(
      items, [&](const std::string& id) -> const SchemaCatalog& { return schemas.get(id); }, predict,
      [url = a.generator] { return make_generator(url); }, options);
  const auto report = accuracy_report(run.records);

  if (!a.trace.empty()) {
    std::ofstream out(a.trace);
    if (!out) throw CliError("cannot write " + a.trace);
    for (std::size_t i = 0; i < items.size(); ++i) {
      nlohmann::ordered_json j;
      j["id"] = items[i].id;
      j["db_id"] = items[i].db_id;
      j["loop"] = to_json(run.loops[i]);
      out << j.dump() << "\n";
    }
  }
  if (a.json) std::cout << to_json(report).dump(2) << "\n";
  else print_table(report);
  return 0;
}

struct GenCorpusArgs {
  std::string corpus;
  std::string schema;
  std::string out;
  int paraphrases = 2;
  std::string paraphrase = "on";
  std::uint64_t seed = 0;
};

int cmd_gen_corpus(const GenCorpusArgs& a) {
  if (!fs::is_regular_file(a.corpus)) throw CliError("corpus not found: " + a.corpus);
  if (a.paraphrases < 0) throw CliError("--paraphrases must not be negative");
  const auto items = load_corpus(a.corpus);
  Schemas schemas(a.schema.empty() ? default_schema_location() : fs::path(a.schema));
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) throw CliError("cannot write " + a.out);
  }
  std::ostream& out = a.out.empty() ? std::cout : file;
  const int variants = on_off(a.paraphrase) ? a.paraphrases : 0;
  std::uint64_t counter = 0;
  for (const auto& item : items) {
    const auto& schema = schemas.get(item.db_id);
    const auto query = parse_sql(item.gold_sql, schema);
    const auto explanation = explain_query(decompose(query), schema);
    for (const auto& step : explanation.steps) {
      if (!step.kind) continue;
      const auto& core = subtree(explanation.tree, step.slot.path).core();
      const auto clause_sql = render_clause(core.clauses[step.slot.clause_index], core_scope(core));
      auto emit = [&](const std::string& text) {
        nlohmann::ordered_json j{{"explanation", text}, {"clause_sql", clause_sql}, {"db_id", item.db_id},
                                 {"clause_kind", std::string(to_string(*step.kind))}};
        out << j.dump() << "\n";
      };
      emit(step.text);
      for (int v = 0; v < variants; ++v) emit(paraphrase(step, a.seed * 0x100000001B3ULL + counter++).text);
    }
  }
  return 0;
}

struct ServeArgs {
  std::string data_dir;
  std::string bind;
};

Service* running = nullptr;

int cmd_serve(const ServeArgs& a) {
  ServiceConfig defaults;
  defaults.data_dir = CLAUSEWISE_DATA_DIR;
  auto config = config_from_env(defaults);
  if (!a.data_dir.empty()) config.data_dir = a.data_dir;
  if (!a.bind.empty()) {
    const auto colon = a.bind.rfind(':');
    if (colon == std::string::npos) throw CliError("--bind must be host:port");
    config.bind_host = a.bind.substr(0, colon);
    config.port = std::stoi(a.bind.substr(colon + 1));
  }
  Service service(config);
  const int port = service.bind();
  std::cerr << "clausewise: serving " << config.data_dir << " on " << config.bind_host << ":" << port << "\n";
  running = &service;
  std::signal(SIGINT, [](int) { running->stop(); });
  std::signal(SIGTERM, [](int) { running->stop(); });
  service.serve();
  running = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explain SQL queries step by step and refine them through edited steps."};
  app.require_subcommand(1);

  ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "Print the step-by-step explanation of a query");
  explain->add_option("query", ex.query, "SQL text or a file holding it")->required();
  explain->add_option("--schema", ex.schema, "Schema file or directory of schema files");
  explain->add_option("--db", ex.db_id, "Schema id when --schema holds several");
  explain->add_flag("--json", ex.json, "Print JSON");
  explain->add_option("--paraphrase", ex.paraphrase, "Reword steps with synonyms")->check(CLI::IsMember({"on", "off"}));
  explain->add_option("--seed", ex.seed, "Paraphrase seed");

  EditArgs ed;
  auto* edit = app.add_subcommand("edit", "Change one step of a query's explanation and print the refined query");
  edit->add_option("query", ed.query, "SQL text or a file holding it")->required();
  edit->add_option("step", ed.step, "1-based step number")->required();
  edit->add_option("text", ed.text, "New step text");
  edit->add_option("--schema", ed.schema, "Schema file or directory of schema files");
  edit->add_option("--db", ed.db_id, "Schema id when --schema holds several");
  edit->add_option("--generator", ed.generator, "Clause generator URL (default: rule-based)");
  auto* ins = edit->add_flag("--insert", ed.insert, "Insert the text before the step instead of replacing it");
  auto* del = edit->add_flag("--delete", ed.remove, "Delete the step");
  ins->excludes(del);
  edit->add_flag("--json", ed.json, "Print JSON");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run the simulated-feedback refinement loop over a corpus");
  simulate->add_option("corpus", sim.corpus, "JSONL corpus")->required();
  simulate->add_option("--schema", sim.schema, "Schema file or directory of schema files");
  simulate->add_option("--backend", sim.backend, "stub (corrupted gold), corpus (predicted_sql) or a text-to-SQL URL");
  simulate->add_option("--generator", sim.generator, "Clause generator URL (default: rule-based)");
  simulate->add_option("--rounds", sim.rounds, "Maximum refinement rounds")->check(CLI::PositiveNumber);
  simulate->add_option("--paraphrase", sim.paraphrase, "Reword shown and written steps")->check(CLI::IsMember({"on", "off"}));
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--threads", sim.threads, "Worker threads (0: all cores)");
  simulate->add_option("--database", sim.database, "SQLite file or directory of {db_id}.sqlite for execution accuracy");
  simulate->add_option("--trace", sim.trace, "Write per-item loop traces as JSONL");
  simulate->add_flag("--json", sim.json, "Print the report as JSON");

  GenCorpusArgs gen;
  auto* gen_corpus = app.add_subcommand("gen-corpus", "Write (explanation, clause) training pairs for a corpus");
  gen_corpus->add_option("corpus", gen.corpus, "JSONL corpus")->required();
  gen_corpus->add_option("--schema", gen.schema, "Schema file or directory of schema files");
  gen_corpus->add_option("--out", gen.out, "Output file (default: stdout)");
  gen_corpus->add_option("--paraphrases", gen.paraphrases, "Paraphrased copies per clause");
  gen_corpus->add_option("--paraphrase", gen.paraphrase, "off writes the original explanations only")
      ->check(CLI::IsMember({"on", "off"}));
  gen_corpus->add_option("--seed", gen.seed, "Random seed");

  ServeArgs srv;
  auto* serve = app.add_subcommand("serve", "Run the HTTP session service");
  serve->add_option("--data-dir", srv.data_dir, "Directory with schemas/ and sessions/");
  serve->add_option("--bind", srv.bind, "host:port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*explain) return cmd_explain(ex);
    if (*edit) {
      if (!ed.remove && ed.text.empty()) throw CliError("edit needs the new step text");
      return cmd_edit(ed);
    }
    if (*simulate) return cmd_simulate(sim);
    if (*gen_corpus) return cmd_gen_corpus(gen);
    if (*serve) return cmd_serve(srv);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
