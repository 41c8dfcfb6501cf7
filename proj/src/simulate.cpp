#include "clausewise/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

#include <httplib.h>

#include "clausewise/compose.hpp"
#include "clausewise/errors.hpp"
#include "clausewise/executor.hpp"
#include "clausewise/sql.hpp"
#include "clausewise/text.hpp"

namespace clausewise {

std::string_view to_string(FeedbackOp::Kind k) {
  switch (k) {
    case FeedbackOp::Kind::Edit: return "REPLACE_STEP";
    case FeedbackOp::Kind::Insert: return "INSERT_STEP";
    case FeedbackOp::Kind::Delete: return "DELETE_STEP";
  }
  return "";
}

nlohmann::ordered_json to_json(const FeedbackOp& op) {
  nlohmann::ordered_json j;
  j["op"] = std::string(to_string(op.kind));
  j["position"] = op.position;
  if (op.kind != FeedbackOp::Kind::Delete) j["text"] = op.text;
  return j;
}

void apply_feedback(StepDocument& document, const std::vector<FeedbackOp>& ops) {
  for (const auto& op : ops) {
    switch (op.kind) {
      case FeedbackOp::Kind::Edit: document.edit(op.position, op.text); break;
      case FeedbackOp::Kind::Insert: document.insert(op.position, op.text); break;
      case FeedbackOp::Kind::Delete: document.erase(op.position); break;
    }
  }
}

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t n) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (n + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

bool has_prefix(const TreePath& path, const TreePath& prefix) {
  return path.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), path.begin());
}

TreePath extend(TreePath p, PathStep::Kind kind, std::size_t index = 0) {
  p.push_back({kind, index});
  return p;
}

class Simulator {
 public:
  Simulator(const Explanation& shown, const SchemaCatalog& schema, const SimulatorOptions& options)
      : shown_(shown), schema_(schema), options_(options), doc_(StepDocument::from(shown)) {}

  std::vector<FeedbackOp> run(const ClauseTree& gold) {
    diff({}, gold);
    return std::move(ops_);
  }

 private:
  std::string write(const ExplanationStep& step) {
    if (!options_.paraphrase || !step.kind) return step.text;
    return paraphrase(step, mix(options_.seed, written_++), ParaphraseOptions{options_.probability}).text;
  }

  std::optional<std::size_t> position_of(std::size_t origin) const {
    for (std::size_t i = 0; i < doc_.entries.size(); ++i)
      if (doc_.entries[i].origin == origin) return i;
    return std::nullopt;
  }

  void edit(std::size_t origin, std::string text) {
    const std::size_t pos = *position_of(origin);
    if (doc_.entries[pos].text == text) return;
    doc_.edit(pos, text);
    ops_.push_back({FeedbackOp::Kind::Edit, pos, std::move(text)});
  }

  void erase(std::size_t origin) {
    const std::size_t pos = *position_of(origin);
    doc_.erase(pos);
    ops_.push_back({FeedbackOp::Kind::Delete, pos, {}});
  }

  void insert(std::size_t pos, std::string text) {
    doc_.insert(pos, text);
    ops_.push_back({FeedbackOp::Kind::Insert, pos, std::move(text)});
  }

  /// Shown steps belonging to the subtree at `path`, without the header that introduces it.
  std::vector<std::size_t> range(const TreePath& path) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < shown_.steps.size(); ++i)
      if (has_prefix(shown_.steps[i].slot.path, path)) out.push_back(i);
    if (!path.empty() && !out.empty()) out.erase(out.begin());
    return out;
  }

  std::optional<std::size_t> clause_step(const TreePath& path, std::size_t clause_index) const {
    for (std::size_t i = 0; i < shown_.steps.size(); ++i) {
      const auto& slot = shown_.steps[i].slot;
      if (slot.role == StepSlot::Role::Clause && slot.path == path && slot.clause_index == clause_index) return i;
    }
    return std::nullopt;
  }

  void diff(const TreePath& path, const ClauseTree& gold) {
    const ClauseTree& pred = subtree(shown_.tree, path);
    if (!pred.is_core() && !gold.is_core()) {
      diff(extend(path, PathStep::Kind::Left), *gold.compound().left);
      diff(extend(path, PathStep::Kind::Right), *gold.compound().right);
      if (pred.compound().op != gold.compound().op) {
        for (std::size_t i = 0; i < shown_.steps.size(); ++i)
          if (shown_.steps[i].slot.role == StepSlot::Role::Combine && shown_.steps[i].slot.path == path)
            edit(i, combine_text(gold.compound().op));
      }
      return;
    }
    if (pred.is_core() && gold.is_core() && pred.core().blocks.size() == gold.core().blocks.size()) {
      for (std::size_t b = 0; b < gold.core().blocks.size(); ++b)
        diff(extend(path, PathStep::Kind::Block, b), gold.core().blocks[b]);
      diff_clauses(path, pred.core(), gold.core());
      return;
    }
    replace(path, gold);
  }

  void replace(const TreePath& path, const ClauseTree& gold) {
    const auto steps = range(path);
    std::size_t pos = *position_of(steps.front());
    for (std::size_t origin : steps) erase(origin);
    for (const auto& step : explain_query(gold, schema_).steps) insert(pos++, write(step));
  }

  void diff_clauses(const TreePath& path, const CoreTree& pred, const CoreTree& gold) {
    ExplainContext ctx = context_for(gold);
    for (const auto& t : context_for(pred).scope)
      if (std::none_of(ctx.scope.begin(), ctx.scope.end(), [&](const std::string& s) { return text::iequals(s, t); }))
        ctx.scope.push_back(t);

    auto find = [](const CoreTree& core, ClauseKind kind) -> std::optional<std::size_t> {
      for (std::size_t i = 0; i < core.clauses.size(); ++i)
        if (core.clauses[i].kind == kind) return i;
      return std::nullopt;
    };
    for (auto kind : {ClauseKind::FromJoinOn, ClauseKind::Where, ClauseKind::GroupBy, ClauseKind::Having,
                      ClauseKind::Select, ClauseKind::OrderBy}) {
      const auto p = find(pred, kind);
      const auto g = find(gold, kind);
      if (p && g) {
        if (!clauses_equivalent(pred.clauses[*p], gold.clauses[*g]))
          edit(*clause_step(path, *p), write(explain_clause(gold.clauses[*g], schema_, ctx)));
      } else if (p) {
        erase(*clause_step(path, *p));
      } else if (g) {
        insert(insert_position(path, pred, kind), write(explain_clause(gold.clauses[*g], schema_, ctx)));
      }
    }
  }

  /// Before the first remaining step of the core that runs later, else after the last one.
  std::size_t insert_position(const TreePath& path, const CoreTree& pred, ClauseKind kind) const {
    std::optional<std::size_t> after;
    for (std::size_t i = 0; i < shown_.steps.size(); ++i) {
      const auto& slot = shown_.steps[i].slot;
      if (slot.role != StepSlot::Role::Clause || slot.path != path) continue;
      const auto pos = position_of(i);
      if (!pos) continue;
      if (execution_rank(pred.clauses[slot.clause_index].kind) > execution_rank(kind)) return *pos;
      after = *pos + 1;
    }
    if (after) return *after;
    const auto steps = range(path);
    for (std::size_t origin : steps)
      if (const auto pos = position_of(origin)) return *pos + 1;
    return doc_.entries.size();
  }

  const Explanation& shown_;
  const SchemaCatalog& schema_;
  SimulatorOptions options_;
  StepDocument doc_;
  std::vector<FeedbackOp> ops_;
  std::uint64_t written_ = 0;
};

}  // namespace

std::vector<FeedbackOp> simulate_feedback(const Explanation& shown, const SqlAst& gold, const SchemaCatalog& schema,
                                          const SimulatorOptions& options) {
  return Simulator(shown, schema, options).run(decompose(gold));
}

// ---------------------------------------------------------------------------

namespace {

class Corrupter {
 public:
  Corrupter(const SchemaCatalog& schema, std::uint64_t seed) : schema_(schema), rng_(seed) {}

  /// Applies one random operation; false when the chosen one did not apply.
  bool apply(ClauseTree& tree, std::vector<std::string>& log) {
    std::vector<TreePath> cores;
    collect(tree, {}, cores);
    CoreTree& core = subtree(tree, cores[uniform(cores.size())]).core();
    switch (uniform(3)) {
      case 0: return drop(core, log);
      case 1: return alter(core, log);
      default: return add(core, log);
    }
  }

 private:
  std::size_t uniform(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  void collect(const ClauseTree& t, const TreePath& path, std::vector<TreePath>& out) {
    if (!t.is_core()) {
      collect(*t.compound().left, extend(path, PathStep::Kind::Left), out);
      collect(*t.compound().right, extend(path, PathStep::Kind::Right), out);
      return;
    }
    out.push_back(path);
    for (std::size_t i = 0; i < t.core().blocks.size(); ++i)
      collect(t.core().blocks[i], extend(path, PathStep::Kind::Block, i), out);
  }

  Clause* find(CoreTree& core, ClauseKind kind) {
    for (auto& c : core.clauses)
      if (c.kind == kind) return &c;
    return nullptr;
  }

  std::optional<ColumnRef> random_column(const CoreTree& core, const std::vector<ValueExpr>& avoid) {
    std::vector<ColumnRef> pool;
    for (const auto& t : core_scope(core)) {
      const TableInfo* info = schema_.find_table(t);
      if (!info) continue;
      for (const auto& c : info->columns) {
        ColumnRef ref{info->name, c.name};
        if (std::none_of(avoid.begin(), avoid.end(), [&](const ValueExpr& v) { return v.column == ref; })) pool.push_back(ref);
      }
    }
    if (pool.empty()) return std::nullopt;
    return pool[uniform(pool.size())];
  }

  bool numeric(const ColumnRef& c) const {
    const ColumnInfo* info = schema_.find_column(c.table, c.column);
    return info && info->type == "number";
  }

  bool drop(CoreTree& core, std::vector<std::string>& log) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < core.clauses.size(); ++i) {
      const auto k = core.clauses[i].kind;
      if (k == ClauseKind::Where || k == ClauseKind::GroupBy || k == ClauseKind::Having || k == ClauseKind::OrderBy)
        candidates.push_back(i);
      if (k == ClauseKind::Select && core.clauses[i].select_body().items.size() > 1) candidates.push_back(i);
    }
    if (candidates.empty()) return false;
    const std::size_t i = candidates[uniform(candidates.size())];
    if (core.clauses[i].kind == ClauseKind::Select) {
      auto& items = core.clauses[i].select_body().items;
      items.erase(items.begin() + static_cast<std::ptrdiff_t>(uniform(items.size())));
      log.push_back("drop SELECT item");
      return true;
    }
    log.push_back("drop " + std::string(to_string(core.clauses[i].kind)));
    core.clauses.erase(core.clauses.begin() + static_cast<std::ptrdiff_t>(i));
    return true;
  }

  void leaves(Condition& c, std::vector<Predicate*>& out) {
    if (c.kind == Condition::Kind::Predicate) {
      out.push_back(&*c.predicate);
      return;
    }
    for (auto& child : c.children) leaves(child, out);
  }

  bool alter_predicate(Predicate& p) {
    if (auto* lit = std::get_if<Literal>(&p.rhs); lit && uniform(2) == 0) {
      if (lit->kind == Literal::Kind::Number) {
        const bool integral = lit->text.find('.') == std::string::npos && text::is_number(lit->text);
        lit->text = integral ? std::to_string(std::stoll(lit->text) + 1 + static_cast<long long>(uniform(9)))
                             : lit->text + "1";
      } else {
        lit->text = lit->text.find('%') != std::string::npos ? "%" + lit->text : lit->text + "s";
      }
      return true;
    }
    static const CmpOp ordered[] = {CmpOp::Eq, CmpOp::Ne, CmpOp::Gt, CmpOp::Ge, CmpOp::Lt, CmpOp::Le};
    if (std::find(std::begin(ordered), std::end(ordered), p.op) == std::end(ordered)) return false;
    CmpOp next = p.op;
    while (next == p.op) next = ordered[uniform(6)];
    p.op = next;
    return true;
  }

  bool alter(CoreTree& core, std::vector<std::string>& log) {
    switch (uniform(4)) {
      case 0: {
        Clause* c = find(core, uniform(2) ? ClauseKind::Where : ClauseKind::Having);
        if (!c) return false;
        std::vector<Predicate*> preds;
        leaves(c->filter().condition, preds);
        if (!alter_predicate(*preds[uniform(preds.size())])) return false;
        log.push_back("alter " + std::string(to_string(c->kind)) + " predicate");
        return true;
      }
      case 1: {
        Clause* c = find(core, ClauseKind::Select);
        auto& items = c->select_body().items;
        auto& item = items[uniform(items.size())];
        if (item.column.is_star()) return false;
        if (uniform(2) == 0) {
          static const AggFunc funcs[] = {AggFunc::None, AggFunc::Count, AggFunc::Max, AggFunc::Min};
          AggFunc next = item.func;
          while (next == item.func) next = funcs[uniform(4)];
          item.func = next;
          item.distinct = false;
          log.push_back("alter SELECT aggregate");
          return true;
        }
        auto col = random_column(core, items);
        if (!col) return false;
        item.column = *col;
        log.push_back("alter SELECT column");
        return true;
      }
      case 2: {
        Clause* c = find(core, ClauseKind::OrderBy);
        if (!c) return false;
        auto& body = c->order();
        if (body.order && uniform(2) == 0) {
          body.order->dir = body.order->dir == SortDir::Desc ? SortDir::Asc : SortDir::Desc;
          log.push_back("alter ORDER BY direction");
          return true;
        }
        body.limit = body.limit ? *body.limit + 1 + static_cast<std::int64_t>(uniform(4)) : 1;
        log.push_back("alter LIMIT");
        return true;
      }
      default: {
        Clause* c = find(core, ClauseKind::GroupBy);
        if (!c) return false;
        auto& keys = c->group().keys;
        auto col = random_column(core, keys);
        if (!col) return false;
        keys[uniform(keys.size())].column = *col;
        log.push_back("alter GROUP BY key");
        return true;
      }
    }
  }

  bool add(CoreTree& core, std::vector<std::string>& log) {
    switch (uniform(3)) {
      case 0: {
        auto col = random_column(core, {});
        if (!col) return false;
        Predicate p;
        p.lhs.column = *col;
        if (numeric(*col)) {
          p.op = uniform(2) ? CmpOp::Gt : CmpOp::Lt;
          p.rhs = Literal::number(std::to_string(1 + uniform(50)));
        } else {
          p.op = CmpOp::Eq;
          static const char* words[] = {"Alpha", "Bravo", "Delta", "Echo"};
          p.rhs = Literal::string(words[uniform(4)]);
        }
        Condition leaf = Condition::leaf(std::move(p));
        if (Clause* w = find(core, ClauseKind::Where)) {
          w->filter().condition = Condition::both(std::move(w->filter().condition), std::move(leaf));
        } else {
          core.clauses.push_back(Clause::where(std::move(leaf)));
        }
        log.push_back("add WHERE predicate");
        return true;
      }
      case 1: {
        Clause* c = find(core, ClauseKind::Select);
        auto col = random_column(core, c->select_body().items);
        if (!col) return false;
        c->select_body().items.push_back(ValueExpr{AggFunc::None, false, *col});
        log.push_back("add SELECT item");
        return true;
      }
      default: {
        if (Clause* c = find(core, ClauseKind::OrderBy)) {
          if (c->order().limit) return false;
          c->order().limit = 1 + static_cast<std::int64_t>(uniform(5));
          log.push_back("add LIMIT");
          return true;
        }
        if (find(core, ClauseKind::GroupBy)) return false;
        auto col = random_column(core, {});
        if (!col) return false;
        OrderBy order;
        order.keys.push_back(ValueExpr{AggFunc::None, false, *col});
        order.dir = uniform(2) ? SortDir::Desc : SortDir::Asc;
        core.clauses.push_back(Clause::order_by(std::move(order), std::nullopt));
        log.push_back("add ORDER BY");
        return true;
      }
    }
  }

  const SchemaCatalog& schema_;
  std::mt19937_64 rng_;
};

}  // namespace

Corruption corrupt_query(const SqlAst& gold, const SchemaCatalog& schema, std::uint64_t seed, int min_ops, int max_ops) {
  Corrupter corrupter(schema, seed);
  std::mt19937_64 rng(mix(seed, 7));
  for (int attempt = 0; attempt < 200; ++attempt) {
    ClauseTree tree = decompose(gold);
    Corruption out;
    const int wanted = std::uniform_int_distribution<int>(min_ops, std::max(min_ops, max_ops))(rng);
    for (int tries = 0; static_cast<int>(out.operations.size()) < wanted && tries < 50; ++tries)
      corrupter.apply(tree, out.operations);
    try {
      out.query = compose(tree, schema);
    } catch (const ComposeError&) {
      continue;
    }
    if (!exact_set_match(out.query, gold)) return out;
  }
  throw Error("could not corrupt query: " + render_sql(gold));
}

std::string LiteralSqlBackend::predict(const std::string& question, const SchemaCatalog& schema) {
  parse_sql(question, schema);
  return question;
}

RemoteTextToSql::RemoteTextToSql(std::string url, std::chrono::milliseconds timeout)
    : url_(std::move(url)), timeout_(timeout) {}

std::string RemoteTextToSql::predict(const std::string& question, const SchemaCatalog& schema) {
  const auto scheme_end = url_.find("://");
  const auto path_start = url_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string base = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url_.substr(path_start);
  httplib::Client client(base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  nlohmann::json body{{"question", question}, {"schema_id", schema.id()}};
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) throw Error("text-to-SQL service unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) throw Error("text-to-SQL service answered HTTP " + std::to_string(res->status));
  try {
    return nlohmann::json::parse(res->body).at("sql").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw Error("text-to-SQL service reply lacks sql: " + res->body);
  }
}

LoopResult run_refinement_loop(const SqlAst& initial, const SqlAst& gold, const SchemaCatalog& schema,
                               ClauseGenerator& generator, const LoopOptions& options) {
  LoopResult result;
  SqlAst current = initial;
  result.initially_correct = exact_set_match(current, gold);
  result.solved = result.initially_correct;
  for (int round = 1; round <= options.max_rounds && !result.solved; ++round) {
    RoundRecord rec;
    rec.round = round;
    rec.shown_sql = render_sql(current);
    Explanation shown = explain_query(decompose(current), schema);
    if (options.paraphrase) {
      for (std::size_t i = 0; i < shown.steps.size(); ++i) {
        if (!shown.steps[i].kind) continue;
        shown.steps[i] = paraphrase(shown.steps[i], mix(options.seed, static_cast<std::uint64_t>(round) * 1000 + i),
                                    ParaphraseOptions{options.probability});
      }
    }
    for (const auto& s : shown.steps) rec.shown_steps.push_back(s.text);
    SimulatorOptions sim{options.paraphrase, mix(options.seed, static_cast<std::uint64_t>(round) + 500000), options.probability};
    rec.feedback = simulate_feedback(shown, gold, schema, sim);
    StepDocument doc = StepDocument::from(shown);
    result.rounds_used = round;
    apply_feedback(doc, rec.feedback);
    // A step that cannot be turned into a clause is reported and put back as it
    // was shown; the remaining feedback still applies.
    for (std::size_t attempt = 0; attempt <= doc.entries.size(); ++attempt) {
      try {
        auto refined = refine(shown, doc, schema, generator);
        rec.outcomes = std::move(refined.outcomes);
        current = std::move(refined.query);
        break;
      } catch (const StepError& e) {
        rec.errors.push_back(e.what());
        if (e.step() == 0 || e.step() > doc.entries.size()) {
          result.error = true;
          break;
        }
        auto& entry = doc.entries[e.step() - 1];
        if (entry.origin) entry.text = shown.steps[*entry.origin].text;
        else doc.erase(e.step() - 1);
      }
    }
    rec.result_sql = render_sql(current);
    rec.verdicts = component_match(current, gold);
    result.solved = rec.verdicts.exact();
    result.rounds.push_back(std::move(rec));
    if (result.error) break;
  }
  result.final_sql = render_sql(current);
  return result;
}

nlohmann::ordered_json to_json(const LoopResult& result) {
  nlohmann::ordered_json j;
  j["initially_correct"] = result.initially_correct;
  j["solved"] = result.solved;
  j["rounds_used"] = result.rounds_used;
  j["error"] = result.error;
  j["final_sql"] = result.final_sql;
  auto& rounds = j["rounds"];
  rounds = nlohmann::ordered_json::array();
  for (const auto& r : result.rounds) {
    nlohmann::ordered_json jr;
    jr["round"] = r.round;
    jr["shown_sql"] = r.shown_sql;
    jr["shown_steps"] = r.shown_steps;
    auto& fb = jr["feedback"];
    fb = nlohmann::ordered_json::array();
    for (const auto& op : r.feedback) fb.push_back(to_json(op));
    auto& oc = jr["outcomes"];
    oc = nlohmann::ordered_json::array();
    for (const auto& o : r.outcomes) oc.push_back(to_json(o));
    if (!r.errors.empty()) jr["errors"] = r.errors;
    jr["result_sql"] = r.result_sql;
    jr["verdicts"] = to_json(r.verdicts);
    rounds.push_back(std::move(jr));
  }
  return j;
}

Predictor corrupting_predictor(std::uint64_t seed) {
  return [seed](const CorpusItem& item, std::size_t index, const SchemaCatalog& schema) {
    const auto gold = parse_sql(item.gold_sql, schema);
    return render_sql(corrupt_query(gold, schema, mix(seed, index), 1, 3).query);
  };
}

namespace {

std::optional<bool> same_execution(SqliteExecutor* executor, const SqlAst& predicted, const SqlAst& gold) {
  if (!executor) return std::nullopt;
  const bool ordered = gold.is_core() ? gold.core().order_by.has_value() : false;
  try {
    return same_results(executor->run(predicted), executor->run(gold), ordered);
  } catch (const Error&) {
    return false;
  }
}

std::filesystem::path database_for(const std::filesystem::path& database, const std::string& db_id) {
  if (database.empty()) return {};
  if (std::filesystem::is_directory(database)) return database / (db_id + ".sqlite");
  return database;
}

}  // namespace

CorpusRun run_corpus(const std::vector<CorpusItem>& items, const std::function<const SchemaCatalog&(const std::string&)>& schema_for,
                     const Predictor& predict, const std::function<std::unique_ptr<ClauseGenerator>()>& make_generator,
                     const CorpusRunOptions& options) {
  CorpusRun run;
  run.records.resize(items.size());
  run.loops.resize(items.size());
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;

  auto work = [&] {
    auto generator = make_generator();
    std::map<std::string, std::unique_ptr<SqliteExecutor>> executors;
    for (std::size_t i = next++; i < items.size(); i = next++) {
      try {
        const auto& item = items[i];
        const auto& schema = schema_for(item.db_id);
        const auto gold = parse_sql(item.gold_sql, schema);
        auto& rec = run.records[i];
        rec.id = item.id;
        rec.difficulty = item.difficulty.empty() ? difficulty(gold) : item.difficulty;

        SqliteExecutor* executor = nullptr;
        if (const auto db = database_for(options.database, item.db_id); !db.empty()) {
          auto& slot = executors[db.string()];
          if (!slot) slot = std::make_unique<SqliteExecutor>(db);
          executor = slot.get();
        }

        std::optional<SqlAst> initial;
        try {
          initial = parse_sql(predict(item, i, schema), schema);
        } catch (const Error& e) {
          rec.error = true;
          rec.before = rec.after = ComponentVerdicts{false, false, false, false, false, false, false};
          run.loops[i].rounds.push_back(RoundRecord{0, {}, {}, {}, {}, {std::string("prediction failed: ") + e.what()}, {}, {}});
          run.loops[i].error = true;
          if (executor) rec.execution_before = rec.execution_after = false;
          continue;
        }
        rec.before = component_match(*initial, gold);
        LoopOptions loop = options.loop;
        loop.seed = mix(options.loop.seed, i);
        auto result = run_refinement_loop(*initial, gold, schema, *generator, loop);
        const auto final_query = parse_sql(result.final_sql, schema);
        rec.after = component_match(final_query, gold);
        rec.rounds = result.rounds_used;
        rec.error = result.error;
        rec.execution_before = same_execution(executor, *initial, gold);
        rec.execution_after = same_execution(executor, final_query, gold);
        run.loops[i] = std::move(result);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = items.size();
      }
    }
  };

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(items.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return run;
}

}  // namespace clausewise
