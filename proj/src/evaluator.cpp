#include "clausewise/evaluator.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "clausewise/errors.hpp"
#include "clausewise/text.hpp"

namespace clausewise {

namespace {

bool same_literal(const Literal& a, const Literal& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Literal::Kind::String) return a.text == b.text;
  char* ea = nullptr;
  char* eb = nullptr;
  const double x = std::strtod(a.text.c_str(), &ea);
  const double y = std::strtod(b.text.c_str(), &eb);
  if (*ea || *eb) return a.text == b.text;
  return x == y;
}

bool same_operand(const Operand& a, const Operand& b) {
  if (a.index() != b.index()) return false;
  if (auto* v = std::get_if<ValueExpr>(&a)) return *v == std::get<ValueExpr>(b);
  if (auto* l = std::get_if<Literal>(&a)) return same_literal(*l, std::get<Literal>(b));
  if (auto* q = std::get_if<Box<Query>>(&a)) return exact_set_match(**q, *std::get<Box<Query>>(b));
  return std::get<SubquerySlot>(a).index == std::get<SubquerySlot>(b).index;
}

bool same_predicate(const Predicate& a, const Predicate& b) {
  if (a.op != b.op || a.upper.has_value() != b.upper.has_value()) return false;
  if (a.upper && !same_operand(*a.upper, *b.upper)) return false;
  if (a.lhs == b.lhs && same_operand(a.rhs, b.rhs)) return true;
  // Column-to-column equality is symmetric.
  if (a.op == CmpOp::Eq || a.op == CmpOp::Ne) {
    auto* ar = std::get_if<ValueExpr>(&a.rhs);
    auto* br = std::get_if<ValueExpr>(&b.rhs);
    return ar && br && *ar == b.lhs && a.lhs == *br;
  }
  return false;
}

bool same_condition(const Condition& a, const Condition& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == Condition::Kind::Predicate) return same_predicate(*a.predicate, *b.predicate);
  if (a.children.size() != b.children.size()) return false;
  for (std::size_t i = 0; i < a.children.size(); ++i)
    if (!same_condition(a.children[i], b.children[i])) return false;
  return true;
}

void conjuncts(const Condition& c, std::vector<const Condition*>& out) {
  if (c.kind == Condition::Kind::And) {
    for (const auto& child : c.children) conjuncts(child, out);
    return;
  }
  out.push_back(&c);
}

bool same_multiset(const std::vector<const Condition*>& a, const std::vector<const Condition*>& b) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const auto* x : a) {
    bool found = false;
    for (std::size_t i = 0; i < b.size() && !found; ++i)
      if (!used[i] && same_condition(*x, *b[i])) used[i] = found = true;
    if (!found) return false;
  }
  return true;
}

bool same_set(const std::vector<const Condition*>& a, const std::vector<const Condition*>& b) {
  auto covered = [](const std::vector<const Condition*>& xs, const std::vector<const Condition*>& ys) {
    for (const auto* x : xs)
      if (std::none_of(ys.begin(), ys.end(), [&](const Condition* y) { return same_condition(*x, *y); })) return false;
    return true;
  };
  return covered(a, b) && covered(b, a);
}

bool same_filter(const std::optional<Condition>& a, const std::optional<Condition>& b) {
  if (!a || !b) return a.has_value() == b.has_value();
  std::vector<const Condition*> x, y;
  conjuncts(*a, x);
  conjuncts(*b, y);
  return same_multiset(x, y);
}

bool same_values(const std::vector<ValueExpr>& a, const std::vector<ValueExpr>& b) {
  auto covered = [](const std::vector<ValueExpr>& xs, const std::vector<ValueExpr>& ys) {
    for (const auto& x : xs)
      if (std::find(ys.begin(), ys.end(), x) == ys.end()) return false;
    return true;
  };
  return covered(a, b) && covered(b, a);
}

bool same_from(const std::vector<JoinSpec>& a, const std::vector<JoinSpec>& b) {
  auto tables = [](const std::vector<JoinSpec>& joins) {
    std::vector<std::string> out;
    for (const auto& j : joins) out.push_back(text::lower(j.table));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  if (tables(a) != tables(b)) return false;
  std::vector<const Condition*> x, y;
  for (const auto& j : a)
    if (j.on) conjuncts(*j.on, x);
  for (const auto& j : b)
    if (j.on) conjuncts(*j.on, y);
  return same_set(x, y);
}

SortDir normalized(SortDir d) { return d == SortDir::None ? SortDir::Asc : d; }

bool same_order(const std::optional<OrderBy>& a, std::optional<std::int64_t> la, const std::optional<OrderBy>& b,
                std::optional<std::int64_t> lb) {
  if (la != lb || a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->keys == b->keys && normalized(a->dir) == normalized(b->dir);
}

/// Leftmost core and the (operator, right side) chain above it.
const SelectCore& spine(const Query& q, std::vector<const Compound*>& chain) {
  const Query* at = &q;
  while (!at->is_core()) {
    chain.push_back(&at->compound());
    at = &*at->compound().left;
  }
  return at->core();
}

}  // namespace

bool verdict(const ComponentVerdicts& v, std::string_view component) {
  if (component == "select") return v.select;
  if (component == "from") return v.from;
  if (component == "where") return v.where;
  if (component == "group_by") return v.group_by;
  if (component == "having") return v.having;
  if (component == "order_by") return v.order_by;
  if (component == "compound") return v.compound;
  throw std::invalid_argument("unknown component '" + std::string(component) + "'");
}

ComponentVerdicts component_match(const SqlAst& predicted, const SqlAst& gold) {
  std::vector<const Compound*> pc, gc;
  const SelectCore& p = spine(predicted, pc);
  const SelectCore& g = spine(gold, gc);
  ComponentVerdicts v;
  v.select = p.distinct == g.distinct && same_values(p.select, g.select);
  v.from = same_from(p.from, g.from);
  v.where = same_filter(p.where, g.where);
  v.group_by = same_values(p.group_by, g.group_by);
  v.having = same_filter(p.having, g.having);
  v.order_by = same_order(p.order_by, p.limit, g.order_by, g.limit);
  v.compound = pc.size() == gc.size();
  for (std::size_t i = 0; v.compound && i < pc.size(); ++i)
    v.compound = pc[i]->op == gc[i]->op && exact_set_match(*pc[i]->right, *gc[i]->right);
  return v;
}

bool exact_set_match(const SqlAst& predicted, const SqlAst& gold) { return component_match(predicted, gold).exact(); }

bool clauses_equivalent(const Clause& a, const Clause& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ClauseKind::FromJoinOn: return same_from(a.from_body().joins, b.from_body().joins);
    case ClauseKind::Where:
    case ClauseKind::Having: return same_filter(a.filter().condition, b.filter().condition);
    case ClauseKind::GroupBy: return same_values(a.group().keys, b.group().keys);
    case ClauseKind::Select:
      return a.select_body().distinct == b.select_body().distinct && same_values(a.select_body().items, b.select_body().items);
    case ClauseKind::OrderBy: return same_order(a.order().order, a.order().limit, b.order().order, b.order().limit);
  }
  return false;
}

nlohmann::ordered_json to_json(const ComponentVerdicts& v) {
  nlohmann::ordered_json j;
  for (const char* name : kComponentNames) j[name] = verdict(v, name);
  j["exact"] = v.exact();
  return j;
}

namespace {

std::size_t count_predicates(const Condition& c, CmpOp* only = nullptr) {
  if (c.kind == Condition::Kind::Predicate) return !only || c.predicate->op == *only ? 1 : 0;
  std::size_t n = 0;
  for (const auto& child : c.children) n += count_predicates(child, only);
  return n;
}

std::size_t count_or(const Condition& c) {
  std::size_t n = c.kind == Condition::Kind::Or ? 1 : 0;
  for (const auto& child : c.children) n += count_or(child);
  return n;
}

std::size_t count_nested(const Condition& c) {
  if (c.kind != Condition::Kind::Predicate) {
    std::size_t n = 0;
    for (const auto& child : c.children) n += count_nested(child);
    return n;
  }
  std::size_t n = std::holds_alternative<Box<Query>>(c.predicate->rhs) ? 1 : 0;
  if (c.predicate->upper && std::holds_alternative<Box<Query>>(*c.predicate->upper)) ++n;
  return n;
}

}  // namespace

std::string difficulty(const SqlAst& query) {
  std::vector<const Compound*> chain;
  const SelectCore& c = spine(query, chain);
  CmpOp like = CmpOp::Like;
  int comp1 = 0;
  if (c.where) comp1 += 1 + static_cast<int>(count_or(*c.where) + count_predicates(*c.where, &like));
  if (!c.group_by.empty()) ++comp1;
  if (c.order_by) ++comp1;
  if (c.limit) ++comp1;
  if (c.from.size() > 1) comp1 += static_cast<int>(c.from.size()) - 1;

  int comp2 = static_cast<int>(chain.size());
  if (c.where) comp2 += static_cast<int>(count_nested(*c.where));
  if (c.having) comp2 += static_cast<int>(count_nested(*c.having));

  int others = 0;
  const auto aggs = std::count_if(c.select.begin(), c.select.end(), [](const ValueExpr& v) { return v.func != AggFunc::None; });
  if (aggs > 1) ++others;
  if (c.select.size() > 1) ++others;
  if (c.where && count_predicates(*c.where) > 1) ++others;
  if (c.group_by.size() > 1) ++others;

  if (comp1 <= 1 && others == 0 && comp2 == 0) return "easy";
  if ((others <= 2 && comp1 <= 1 && comp2 == 0) || (comp1 <= 2 && others < 2 && comp2 == 0)) return "medium";
  if ((others > 2 && comp1 <= 2 && comp2 == 0) || (comp1 > 2 && comp1 <= 3 && others <= 2 && comp2 == 0) ||
      (comp1 <= 1 && others == 0 && comp2 <= 1))
    return "hard";
  return "extra";
}

std::vector<CorpusItem> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path.string() + "'");
  std::vector<CorpusItem> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CorpusItem item;
      item.id = j.value("id", std::to_string(number));
      item.db_id = j.at("db_id").get<std::string>();
      item.question = j.value("question", "");
      item.gold_sql = j.at("gold_sql").get<std::string>();
      item.difficulty = j.value("difficulty", "");
      if (j.contains("predicted_sql") && j["predicted_sql"].is_string()) item.predicted_sql = j["predicted_sql"].get<std::string>();
      if (j.contains("explanation")) item.explanation = j["explanation"].get<std::vector<std::string>>();
      out.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const CorpusItem& item) {
  nlohmann::ordered_json j;
  j["id"] = item.id;
  j["db_id"] = item.db_id;
  j["question"] = item.question;
  j["gold_sql"] = item.gold_sql;
  if (!item.difficulty.empty()) j["difficulty"] = item.difficulty;
  if (item.predicted_sql) j["predicted_sql"] = *item.predicted_sql;
  if (!item.explanation.empty()) j["explanation"] = item.explanation;
  return j;
}

AccuracyReport accuracy_report(const std::vector<EvaluationRecord>& records) {
  AccuracyReport r;
  for (const char* name : kComponentNames) r.components[name] = {0, 0};
  for (const auto& rec : records) {
    ++r.total;
    const bool before = rec.before.exact();
    const bool after = rec.after.exact();
    r.exact_before += before;
    r.exact_after += after;
    r.errors += rec.error;
    for (const char* name : kComponentNames) {
      r.components[name].first += verdict(rec.before, name);
      r.components[name].second += verdict(rec.after, name);
    }
    auto& bucket = r.by_difficulty[rec.difficulty.empty() ? "unknown" : rec.difficulty];
    ++bucket.total;
    bucket.exact_before += before;
    bucket.exact_after += after;
    if (after) ++r.rounds[rec.rounds];
    if (rec.execution_before && rec.execution_after) {
      if (!r.execution) r.execution.emplace(0, 0);
      ++r.executed;
      r.execution->first += *rec.execution_before;
      r.execution->second += *rec.execution_after;
    }
  }
  return r;
}

nlohmann::ordered_json to_json(const AccuracyReport& r) {
  auto rate = [](std::size_t n, std::size_t d) { return d ? static_cast<double>(n) / static_cast<double>(d) : 0.0; };
  nlohmann::ordered_json j;
  j["total"] = r.total;
  j["exact_match_before"] = rate(r.exact_before, r.total);
  j["exact_match_after"] = rate(r.exact_after, r.total);
  j["errors"] = r.errors;
  auto& comps = j["components"];
  for (const auto& [name, counts] : r.components)
    comps[name] = {{"before", rate(counts.first, r.total)}, {"after", rate(counts.second, r.total)}};
  auto& diff = j["by_difficulty"];
  diff = nlohmann::ordered_json::object();
  for (const auto& [name, b] : r.by_difficulty)
    diff[name] = {{"total", b.total}, {"before", rate(b.exact_before, b.total)}, {"after", rate(b.exact_after, b.total)}};
  auto& rounds = j["rounds"];
  rounds = nlohmann::ordered_json::object();
  for (const auto& [n, count] : r.rounds) rounds[std::to_string(n)] = count;
  if (r.execution)
    j["execution"] = {{"executed", r.executed},
                      {"before", rate(r.execution->first, r.executed)},
                      {"after", rate(r.execution->second, r.executed)}};
  return j;
}

}  // namespace clausewise
