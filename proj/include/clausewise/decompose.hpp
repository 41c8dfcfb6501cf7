#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "clausewise/ast.hpp"
#include "clausewise/schema.hpp"

namespace clausewise {

/// The six clause kinds, declared in execution order.
enum class ClauseKind { FromJoinOn, Where, GroupBy, Having, Select, OrderBy };

std::string_view to_string(ClauseKind kind);
/// Inverse of to_string; accepts the names case-insensitively.
std::optional<ClauseKind> clause_kind_from_string(std::string_view name);

struct FromBody {
  std::vector<JoinSpec> joins;
  friend bool operator==(const FromBody&, const FromBody&) = default;
};

/// WHERE or HAVING.
struct FilterBody {
  Condition condition;
  friend bool operator==(const FilterBody&, const FilterBody&) = default;
};

struct GroupBody {
  std::vector<ValueExpr> keys;
  friend bool operator==(const GroupBody&, const GroupBody&) = default;
};

struct SelectBody {
  bool distinct = false;
  std::vector<ValueExpr> items;
  friend bool operator==(const SelectBody&, const SelectBody&) = default;
};

/// ORDER BY with its LIMIT; a LIMIT without ORDER BY has no `order`.
struct OrderBody {
  std::optional<OrderBy> order;
  std::optional<std::int64_t> limit;
  friend bool operator==(const OrderBody&, const OrderBody&) = default;
};

using ClauseBody = std::variant<FromBody, FilterBody, GroupBody, SelectBody, OrderBody>;

struct Clause {
  ClauseKind kind = ClauseKind::Select;
  ClauseBody body;

  static Clause from(std::vector<JoinSpec> joins);
  static Clause where(Condition c);
  static Clause group_by(std::vector<ValueExpr> keys);
  static Clause having(Condition c);
  static Clause select(std::vector<ValueExpr> items, bool distinct = false);
  static Clause order_by(std::optional<OrderBy> order, std::optional<std::int64_t> limit);

  const FromBody& from_body() const { return std::get<FromBody>(body); }
  const FilterBody& filter() const { return std::get<FilterBody>(body); }
  const GroupBody& group() const { return std::get<GroupBody>(body); }
  const SelectBody& select_body() const { return std::get<SelectBody>(body); }
  const OrderBody& order() const { return std::get<OrderBody>(body); }
  FromBody& from_body() { return std::get<FromBody>(body); }
  FilterBody& filter() { return std::get<FilterBody>(body); }
  GroupBody& group() { return std::get<GroupBody>(body); }
  SelectBody& select_body() { return std::get<SelectBody>(body); }
  OrderBody& order() { return std::get<OrderBody>(body); }

  friend bool operator==(const Clause&, const Clause&) = default;
};

struct ClauseTree;

/// One select core: its clauses in execution order and the nested queries that
/// were lifted out of its conditions. A SubquerySlot{i} in a clause refers to blocks[i].
struct CoreTree {
  std::vector<Clause> clauses;
  std::vector<ClauseTree> blocks;

  friend bool operator==(const CoreTree&, const CoreTree&) = default;
};

struct CompoundTree {
  SetOp op = SetOp::Union;
  Box<ClauseTree> left;
  Box<ClauseTree> right;

  friend bool operator==(const CompoundTree&, const CompoundTree&) = default;
};

struct ClauseTree {
  std::variant<CoreTree, CompoundTree> node;

  bool is_core() const { return std::holds_alternative<CoreTree>(node); }
  const CoreTree& core() const { return std::get<CoreTree>(node); }
  CoreTree& core() { return std::get<CoreTree>(node); }
  const CompoundTree& compound() const { return std::get<CompoundTree>(node); }
  CompoundTree& compound() { return std::get<CompoundTree>(node); }

  friend bool operator==(const ClauseTree&, const ClauseTree&) = default;
};

/// Splits a query into clauses. IN/NOT IN subqueries, and comparison
/// subqueries that do more than select from one table, become blocks of the
/// enclosing core; simple scalar subqueries stay inside their condition.
ClauseTree decompose(const SqlAst& ast);

/// True when a nested query stays inside its parent clause instead of becoming a block.
bool is_inline_subquery(const Query& q, CmpOp op);

/// Address of a subtree: a sequence of Left/Right (compound sides) and Block(i) steps.
struct PathStep {
  enum class Kind { Left, Right, Block };
  Kind kind = Kind::Left;
  std::size_t index = 0;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};
using TreePath = std::vector<PathStep>;

const ClauseTree& subtree(const ClauseTree& tree, const TreePath& path);
ClauseTree& subtree(ClauseTree& tree, const TreePath& path);

/// One explanation step position.
struct StepSlot {
  enum class Role { Clause, BlockHeader, Combine };
  Role role = Role::Clause;
  /// Clause: the core holding the clause. BlockHeader: the subtree being introduced.
  /// Combine: the compound.
  TreePath path;
  std::size_t clause_index = 0;  // Role::Clause
  std::size_t ordinal = 0;       // Role::BlockHeader, 1-based
  SetOp op = SetOp::Union;       // Role::Combine

  friend bool operator==(const StepSlot&, const StepSlot&) = default;
};

/// Steps in execution order: within a core FROM, WHERE, GROUP BY, HAVING,
/// SELECT, ORDER BY; lifted blocks before the core that uses them, each under
/// a "Start the n-th query" header; compound sides first-then-second followed
/// by the combining step.
std::vector<StepSlot> execution_order(const ClauseTree& tree);

/// Rank of a clause kind in execution order.
int execution_rank(ClauseKind kind);

/// Longest chain of nested compounds/blocks.
int nesting_depth(const ClauseTree& tree);

/// Clause text as SQL. `scope` is the FROM table list of the owning core; it
/// decides whether columns are qualified, as in render_sql.
std::string render_clause(const Clause& clause, const std::vector<std::string>& scope);

/// Tables named by the FROM clause of a core tree (empty if it has none).
std::vector<std::string> core_scope(const CoreTree& core);

/// Parses a single clause written as SQL ("WHERE age > 3", "SELECT name, age",
/// "FROM a JOIN b ON ..."). Unqualified columns resolve against `scope`.
/// Throws SqlSyntaxError/ResolutionError.
Clause parse_clause(std::string_view sql, const SchemaCatalog& schema, const std::vector<std::string>& scope);

}  // namespace clausewise
