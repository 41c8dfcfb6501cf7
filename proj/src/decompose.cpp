#include "clausewise/decompose.hpp"

#include <algorithm>

#include "clausewise/errors.hpp"
#include "clausewise/sql.hpp"
#include "clausewise/text.hpp"

namespace clausewise {

std::string_view to_string(ClauseKind kind) {
  switch (kind) {
    case ClauseKind::FromJoinOn: return "FROM_JOIN_ON";
    case ClauseKind::Where: return "WHERE";
    case ClauseKind::GroupBy: return "GROUP_BY";
    case ClauseKind::Having: return "HAVING";
    case ClauseKind::Select: return "SELECT";
    case ClauseKind::OrderBy: return "ORDER_BY";
  }
  return "";
}

std::optional<ClauseKind> clause_kind_from_string(std::string_view name) {
  for (auto k : {ClauseKind::FromJoinOn, ClauseKind::Where, ClauseKind::GroupBy, ClauseKind::Having, ClauseKind::Select,
                 ClauseKind::OrderBy})
    if (text::iequals(name, to_string(k))) return k;
  return std::nullopt;
}

Clause Clause::from(std::vector<JoinSpec> joins) { return {ClauseKind::FromJoinOn, FromBody{std::move(joins)}}; }
Clause Clause::where(Condition c) { return {ClauseKind::Where, FilterBody{std::move(c)}}; }
Clause Clause::group_by(std::vector<ValueExpr> keys) { return {ClauseKind::GroupBy, GroupBody{std::move(keys)}}; }
Clause Clause::having(Condition c) { return {ClauseKind::Having, FilterBody{std::move(c)}}; }
Clause Clause::select(std::vector<ValueExpr> items, bool distinct) {
  return {ClauseKind::Select, SelectBody{distinct, std::move(items)}};
}
Clause Clause::order_by(std::optional<OrderBy> order, std::optional<std::int64_t> limit) {
  return {ClauseKind::OrderBy, OrderBody{std::move(order), limit}};
}

int execution_rank(ClauseKind kind) { return static_cast<int>(kind); }

bool is_inline_subquery(const Query& q, CmpOp op) {
  if (op == CmpOp::In || op == CmpOp::NotIn || !q.is_core()) return false;
  const auto& c = q.core();
  return !c.distinct && c.from.size() == 1 && !c.where && c.group_by.empty() && !c.having && !c.order_by && !c.limit;
}

namespace {

ClauseTree decompose_query(const Query& q);

void lift(Condition& c, std::vector<ClauseTree>& blocks) {
  if (c.kind != Condition::Kind::Predicate) {
    for (auto& child : c.children) lift(child, blocks);
    return;
  }
  auto& p = *c.predicate;
  if (auto* sub = std::get_if<Box<Query>>(&p.rhs); sub && !is_inline_subquery(**sub, p.op)) {
    blocks.push_back(decompose_query(**sub));
    p.rhs = SubquerySlot{blocks.size() - 1};
  }
}

ClauseTree decompose_core(const SelectCore& core) {
  CoreTree tree;
  tree.clauses.push_back(Clause::from(core.from));
  if (core.where) {
    Condition c = *core.where;
    lift(c, tree.blocks);
    tree.clauses.push_back(Clause::where(std::move(c)));
  }
  if (!core.group_by.empty()) tree.clauses.push_back(Clause::group_by(core.group_by));
  if (core.having) {
    Condition c = *core.having;
    lift(c, tree.blocks);
    tree.clauses.push_back(Clause::having(std::move(c)));
  }
  tree.clauses.push_back(Clause::select(core.select, core.distinct));
  if (core.order_by || core.limit) tree.clauses.push_back(Clause::order_by(core.order_by, core.limit));
  return ClauseTree{std::move(tree)};
}

ClauseTree decompose_query(const Query& q) {
  if (q.is_core()) return decompose_core(q.core());
  const auto& c = q.compound();
  return ClauseTree{CompoundTree{c.op, Box<ClauseTree>(decompose_query(*c.left)), Box<ClauseTree>(decompose_query(*c.right))}};
}

void flatten(const ClauseTree& tree, TreePath& path, std::vector<StepSlot>& out) {
  auto child = [&](PathStep step, const ClauseTree& sub, std::size_t ordinal) {
    path.push_back(step);
    out.push_back({StepSlot::Role::BlockHeader, path, 0, ordinal, SetOp::Union});
    flatten(sub, path, out);
    path.pop_back();
  };
  if (!tree.is_core()) {
    const auto& c = tree.compound();
    child({PathStep::Kind::Left, 0}, *c.left, 1);
    child({PathStep::Kind::Right, 0}, *c.right, 2);
    out.push_back({StepSlot::Role::Combine, path, 0, 0, c.op});
    return;
  }
  const auto& core = tree.core();
  for (std::size_t i = 0; i < core.blocks.size(); ++i) child({PathStep::Kind::Block, i}, core.blocks[i], i + 1);
  if (!core.blocks.empty()) out.push_back({StepSlot::Role::BlockHeader, path, 0, core.blocks.size() + 1, SetOp::Union});
  std::vector<std::size_t> order(core.clauses.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return execution_rank(core.clauses[a].kind) < execution_rank(core.clauses[b].kind);
  });
  for (std::size_t i : order) out.push_back({StepSlot::Role::Clause, path, i, 0, SetOp::Union});
}

}  // namespace

ClauseTree decompose(const SqlAst& ast) { return decompose_query(ast); }

const ClauseTree& subtree(const ClauseTree& tree, const TreePath& path) {
  const ClauseTree* t = &tree;
  for (const auto& step : path) {
    switch (step.kind) {
      case PathStep::Kind::Left: t = &*t->compound().left; break;
      case PathStep::Kind::Right: t = &*t->compound().right; break;
      case PathStep::Kind::Block: t = &t->core().blocks.at(step.index); break;
    }
  }
  return *t;
}

ClauseTree& subtree(ClauseTree& tree, const TreePath& path) {
  return const_cast<ClauseTree&>(subtree(static_cast<const ClauseTree&>(tree), path));
}

std::vector<StepSlot> execution_order(const ClauseTree& tree) {
  std::vector<StepSlot> out;
  TreePath path;
  flatten(tree, path, out);
  return out;
}

int nesting_depth(const ClauseTree& tree) {
  if (!tree.is_core()) return 1 + std::max(nesting_depth(*tree.compound().left), nesting_depth(*tree.compound().right));
  int deepest = 0;
  for (const auto& b : tree.core().blocks) deepest = std::max(deepest, 1 + nesting_depth(b));
  return deepest;
}

std::vector<std::string> core_scope(const CoreTree& core) {
  for (const auto& c : core.clauses)
    if (c.kind == ClauseKind::FromJoinOn) {
      std::vector<std::string> out;
      for (const auto& j : c.from_body().joins) out.push_back(j.table);
      return out;
    }
  return {};
}

std::string render_clause(const Clause& clause, const std::vector<std::string>& scope) {
  SelectCore ctx;
  for (const auto& t : scope) ctx.from.push_back({t, std::nullopt});
  auto list = [&](const std::vector<ValueExpr>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + render_value(items[i], ctx);
    return out;
  };
  switch (clause.kind) {
    case ClauseKind::FromJoinOn: {
      const auto& joins = clause.from_body().joins;
      ctx.from = joins;
      std::string out;
      for (std::size_t i = 0; i < joins.size(); ++i) {
        out += (i == 0 ? "FROM " : " JOIN ") + joins[i].table;
        if (joins[i].on) out += " ON " + render_condition(*joins[i].on, ctx);
      }
      return out;
    }
    case ClauseKind::Where: return "WHERE " + render_condition(clause.filter().condition, ctx);
    case ClauseKind::Having: return "HAVING " + render_condition(clause.filter().condition, ctx);
    case ClauseKind::GroupBy: return "GROUP BY " + list(clause.group().keys);
    case ClauseKind::Select: {
      const auto& s = clause.select_body();
      return std::string("SELECT ") + (s.distinct ? "DISTINCT " : "") + list(s.items);
    }
    case ClauseKind::OrderBy: {
      const auto& o = clause.order();
      std::string out;
      if (o.order) {
        out = "ORDER BY " + list(o.order->keys);
        if (o.order->dir != SortDir::None) out += " " + std::string(to_string(o.order->dir));
      }
      if (o.limit) out += (out.empty() ? "" : " ") + std::string("LIMIT ") + std::to_string(*o.limit);
      return out;
    }
  }
  return {};
}

Clause parse_clause(std::string_view sql, const SchemaCatalog& schema, const std::vector<std::string>& scope) {
  const std::string body(text::trim(sql));
  const auto words = text::split_words(body);
  if (words.empty()) throw SqlSyntaxError(0, {"clause"}, "");
  const std::string head = text::upper(words[0]);

  std::string from = " FROM ";
  if (scope.empty()) {
    if (schema.tables().empty()) throw SqlSyntaxError(0, {"FROM"}, head);
    from += schema.tables().front().name;
  }
  for (std::size_t i = 0; i < scope.size(); ++i) from += (i ? " JOIN " : "") + scope[i];

  auto reject = [&]() { throw SqlSyntaxError(0, {"a single " + head + " clause"}, body); };
  if (head == "FROM") {
    const auto q = parse_sql("SELECT * " + body, schema);
    return Clause::from(q.core().from);
  }
  if (head == "SELECT") {
    const auto q = parse_sql(body + from, schema);
    if (!q.is_core() || q.core().from.size() != std::max<std::size_t>(scope.size(), 1)) reject();
    return Clause::select(q.core().select, q.core().distinct);
  }
  const auto q = parse_sql("SELECT *" + from + " " + body, schema);
  if (!q.is_core()) reject();
  const auto& core = q.core();
  const int parts = (core.where ? 1 : 0) + (core.group_by.empty() ? 0 : 1) + (core.having ? 1 : 0) +
                    (core.order_by || core.limit ? 1 : 0);
  if (parts != 1 || core.from.size() != std::max<std::size_t>(scope.size(), 1)) reject();
  if (core.where) return Clause::where(*core.where);
  if (!core.group_by.empty()) return Clause::group_by(core.group_by);
  if (core.having) return Clause::having(*core.having);
  return Clause::order_by(core.order_by, core.limit);
}

}  // namespace clausewise
