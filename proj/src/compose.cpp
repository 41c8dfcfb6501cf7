#include "clausewise/compose.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>

#include "clausewise/errors.hpp"
#include "clausewise/text.hpp"

namespace clausewise {

namespace {

void add_table(std::vector<std::string>& out, const std::string& table) {
  if (!table.empty() && std::find(out.begin(), out.end(), table) == out.end()) out.push_back(table);
}

void collect(const ValueExpr& v, std::vector<std::string>& out) { add_table(out, v.column.table); }

void collect(const Condition& c, std::vector<std::string>& out) {
  if (c.kind != Condition::Kind::Predicate) {
    for (const auto& child : c.children) collect(child, out);
    return;
  }
  collect(c.predicate->lhs, out);
  if (auto* v = std::get_if<ValueExpr>(&c.predicate->rhs)) collect(*v, out);
  if (c.predicate->upper)
    if (auto* v = std::get_if<ValueExpr>(&*c.predicate->upper)) collect(*v, out);
}

Condition fk_condition(const ForeignKey& fk) {
  Predicate p;
  p.lhs.column = {fk.from_table, fk.from_column};
  p.op = CmpOp::Eq;
  p.rhs = ValueExpr{AggFunc::None, false, {fk.to_table, fk.to_column}};
  return Condition::leaf(std::move(p));
}

std::string key(std::string_view table) { return text::lower(table); }

bool contains(const std::vector<std::string>& tables, const std::string& t) {
  return std::any_of(tables.begin(), tables.end(), [&](const std::string& s) { return text::iequals(s, t); });
}

using BlockSource = std::function<Query(std::size_t)>;

void substitute(Condition& c, const BlockSource& block) {
  if (c.kind != Condition::Kind::Predicate) {
    for (auto& child : c.children) substitute(child, block);
    return;
  }
  auto fill = [&](Operand& o) {
    if (auto* slot = std::get_if<SubquerySlot>(&o)) o = Box<Query>(block(slot->index));
  };
  fill(c.predicate->rhs);
  if (c.predicate->upper) fill(*c.predicate->upper);
}

Query compose_tree(const ClauseTree& tree, const SchemaCatalog& schema, const ComposeOptions& options);

Query compose_core(const CoreTree& tree, const SchemaCatalog& schema, const ComposeOptions& options) {
  if (tree.clauses.empty()) throw ComposeError(ComposeError::Kind::EmptyTree, "a query needs at least one clause");
  const auto clauses = merge_same_level(tree.clauses);

  // Blocks no condition refers to are dropped, so they are only composed on use.
  const BlockSource block = [&](std::size_t index) {
    if (index >= tree.blocks.size())
      throw ComposeError(ComposeError::Kind::Structure,
                         "a condition refers to the " + text::ordinal_word(index + 1) + " query, which does not exist");
    return compose_tree(tree.blocks[index], schema, options);
  };

  SelectCore core;
  bool has_select = false;
  std::vector<JoinSpec> joins;
  for (const auto& c : clauses) {
    switch (c.kind) {
      case ClauseKind::FromJoinOn: joins = c.from_body().joins; break;
      case ClauseKind::Where:
        core.where = c.filter().condition;
        substitute(*core.where, block);
        break;
      case ClauseKind::GroupBy: core.group_by = c.group().keys; break;
      case ClauseKind::Having:
        core.having = c.filter().condition;
        substitute(*core.having, block);
        break;
      case ClauseKind::Select:
        has_select = true;
        core.distinct = c.select_body().distinct;
        core.select = c.select_body().items;
        break;
      case ClauseKind::OrderBy:
        core.order_by = c.order().order;
        core.limit = c.order().limit;
        break;
    }
  }
  if (!has_select) throw ComposeError(ComposeError::Kind::MissingSelect, "the query has no step saying what to return");

  const auto required = referenced_tables(clauses);
  if (joins.empty()) {
    if (required.empty()) throw ComposeError(ComposeError::Kind::Structure, "the query names no table");
    joins.push_back({required.front(), std::nullopt});
  }
  core.from = rewrite_from_join(std::move(joins), required, schema, options.fill_missing_on);
  return Query{std::move(core)};
}

Query compose_tree(const ClauseTree& tree, const SchemaCatalog& schema, const ComposeOptions& options) {
  if (tree.is_core()) return compose_core(tree.core(), schema, options);
  const auto& c = tree.compound();
  return Query{Compound{c.op, Box<Query>(compose_tree(*c.left, schema, options)),
                        Box<Query>(compose_tree(*c.right, schema, options))}};
}

}  // namespace

std::vector<Clause> merge_same_level(const std::vector<Clause>& clauses) {
  std::optional<Clause> from, where, group, having, select, order;
  std::optional<std::int64_t> spare_limit;
  for (const auto& c : clauses) {
    switch (c.kind) {
      case ClauseKind::FromJoinOn:
        if (!from) from = c;
        break;
      case ClauseKind::Where:
        where = where ? Clause::where(Condition::both(where->filter().condition, c.filter().condition)) : c;
        break;
      case ClauseKind::Having:
        having = having ? Clause::having(Condition::both(having->filter().condition, c.filter().condition)) : c;
        break;
      case ClauseKind::GroupBy:
        if (!group) group = c;
        break;
      case ClauseKind::Select:
        if (!select) {
          select = c;
          break;
        }
        for (const auto& item : c.select_body().items) {
          auto& items = select->select_body().items;
          if (std::find(items.begin(), items.end(), item) == items.end()) items.push_back(item);
        }
        break;
      case ClauseKind::OrderBy:
        if (!c.order().order) {
          if (!spare_limit) spare_limit = c.order().limit;
        } else if (!order) {
          order = c;
        }
        break;
    }
  }
  if (spare_limit) {
    if (!order) order = Clause::order_by(std::nullopt, spare_limit);
    else if (!order->order().limit) order->order().limit = spare_limit;
  }
  std::vector<Clause> out;
  for (auto* c : {&from, &where, &group, &having, &select, &order})
    if (*c) out.push_back(std::move(**c));
  return out;
}

std::vector<std::string> referenced_tables(const std::vector<Clause>& clauses) {
  std::vector<std::string> out;
  for (const auto& c : clauses) {
    switch (c.kind) {
      case ClauseKind::FromJoinOn:
        for (const auto& j : c.from_body().joins)
          if (j.on) collect(*j.on, out);
        break;
      case ClauseKind::Where:
      case ClauseKind::Having: collect(c.filter().condition, out); break;
      case ClauseKind::GroupBy:
        for (const auto& v : c.group().keys) collect(v, out);
        break;
      case ClauseKind::Select:
        for (const auto& v : c.select_body().items) collect(v, out);
        break;
      case ClauseKind::OrderBy:
        if (c.order().order)
          for (const auto& v : c.order().order->keys) collect(v, out);
        break;
    }
  }
  return out;
}

std::vector<JoinSpec> join_path(const std::vector<std::string>& sources, const std::string& target,
                                const SchemaCatalog& schema) {
  if (contains(sources, target)) return {};
  // Multi-source BFS; each visited table remembers the table and foreign key it was reached by.
  struct Via {
    std::string parent;
    const ForeignKey* fk = nullptr;
  };
  std::map<std::string, Via> seen;
  std::deque<std::string> queue;
  for (const auto& s : sources)
    if (seen.emplace(key(s), Via{}).second) queue.push_back(s);
  while (!queue.empty()) {
    const std::string at = queue.front();
    queue.pop_front();
    for (const auto& fk : schema.foreign_keys()) {
      std::string next;
      if (text::iequals(fk.from_table, at)) next = fk.to_table;
      else if (text::iequals(fk.to_table, at)) next = fk.from_table;
      else continue;
      if (!seen.emplace(key(next), Via{at, &fk}).second) continue;
      if (text::iequals(next, target)) {
        std::vector<JoinSpec> path;
        for (std::string t = next; seen.at(key(t)).fk; t = seen.at(key(t)).parent)
          path.push_back({t, fk_condition(*seen.at(key(t)).fk)});
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(next);
    }
  }
  throw ComposeError(sources.empty() ? std::string() : sources.front(), target);
}

std::vector<JoinSpec> rewrite_from_join(std::vector<JoinSpec> joins, const std::vector<std::string>& required,
                                        const SchemaCatalog& schema, bool fill_missing_on) {
  std::vector<JoinSpec> out;
  std::vector<std::string> present;
  for (auto& j : joins) {
    if (contains(present, j.table)) continue;
    if (!out.empty() && !j.on && fill_missing_on) {
      try {
        auto path = join_path(present, j.table, schema);
        for (auto& step : path) {
          present.push_back(step.table);
          out.push_back(std::move(step));
        }
        continue;
      } catch (const ComposeError&) {
        // No foreign-key route: keep the cross join as written.
      }
    }
    present.push_back(j.table);
    out.push_back(std::move(j));
  }
  for (const auto& t : required) {
    if (contains(present, t)) continue;
    for (auto& step : join_path(present, t, schema)) {
      present.push_back(step.table);
      out.push_back(std::move(step));
    }
  }
  return out;
}

SqlAst compose(const ClauseTree& tree, const SchemaCatalog& schema, const ComposeOptions& options) {
  return compose_tree(tree, schema, options);
}

}  // namespace clausewise
