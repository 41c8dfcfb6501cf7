#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace clausewise {

/// Owning pointer with value semantics: copies deep-copy, equality compares pointees.
template <class T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT(google-explicit-constructor)
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

enum class AggFunc { None, Count, Avg, Max, Min, Sum };
enum class CmpOp { Eq, Ne, Gt, Ge, Lt, Le, In, NotIn, Like, NotLike, Between };
enum class SortDir { None, Asc, Desc };
enum class SetOp { Intersect, Union, Except };

/// A resolved column. `column == "*"` with an empty table denotes the star.
struct ColumnRef {
  std::string table;
  std::string column;

  static ColumnRef star() { return {"", "*"}; }
  bool is_star() const { return column == "*"; }
  friend bool operator==(const ColumnRef&, const ColumnRef&) = default;
};

/// noun or func(noun), optionally func(DISTINCT noun).
struct ValueExpr {
  AggFunc func = AggFunc::None;
  bool distinct = false;
  ColumnRef column;

  friend bool operator==(const ValueExpr&, const ValueExpr&) = default;
};

struct Literal {
  enum class Kind { Number, String };
  Kind kind = Kind::Number;
  std::string text;  // numbers verbatim, strings unquoted

  static Literal number(std::string t) { return {Kind::Number, std::move(t)}; }
  static Literal string(std::string t) { return {Kind::String, std::move(t)}; }
  friend bool operator==(const Literal&, const Literal&) = default;
};

struct Query;

/// Placeholder for a nested query that decomposition moved into its own block.
/// Never present in a composed AST.
struct SubquerySlot {
  std::size_t index = 0;
  friend bool operator==(const SubquerySlot&, const SubquerySlot&) = default;
};

using Operand = std::variant<ValueExpr, Literal, Box<Query>, SubquerySlot>;

struct Predicate {
  ValueExpr lhs;
  CmpOp op = CmpOp::Eq;
  Operand rhs;
  std::optional<Operand> upper;  // BETWEEN rhs AND upper

  friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// Boolean condition tree. And/Or nodes have exactly two children, Not has one.
struct Condition {
  enum class Kind { Predicate, And, Or, Not };
  Kind kind = Kind::Predicate;
  std::optional<Predicate> predicate;
  std::vector<Condition> children;

  static Condition leaf(Predicate p);
  static Condition both(Condition a, Condition b);
  static Condition either(Condition a, Condition b);
  static Condition negate(Condition c);

  friend bool operator==(const Condition&, const Condition&) = default;
};

/// One table of the FROM/JOIN chain; the first entry never has an ON condition.
struct JoinSpec {
  std::string table;
  std::optional<Condition> on;

  friend bool operator==(const JoinSpec&, const JoinSpec&) = default;
};

struct OrderBy {
  std::vector<ValueExpr> keys;
  SortDir dir = SortDir::None;

  friend bool operator==(const OrderBy&, const OrderBy&) = default;
};

struct SelectCore {
  bool distinct = false;
  std::vector<ValueExpr> select;
  std::vector<JoinSpec> from;
  std::optional<Condition> where;
  std::vector<ValueExpr> group_by;
  std::optional<Condition> having;
  std::optional<OrderBy> order_by;
  std::optional<std::int64_t> limit;

  friend bool operator==(const SelectCore&, const SelectCore&) = default;
};

struct Compound {
  SetOp op = SetOp::Union;
  Box<Query> left;
  Box<Query> right;

  friend bool operator==(const Compound&, const Compound&) = default;
};

struct Query {
  std::variant<SelectCore, Compound> node;

  bool is_core() const { return std::holds_alternative<SelectCore>(node); }
  const SelectCore& core() const { return std::get<SelectCore>(node); }
  SelectCore& core() { return std::get<SelectCore>(node); }
  const Compound& compound() const { return std::get<Compound>(node); }
  Compound& compound() { return std::get<Compound>(node); }

  friend bool operator==(const Query&, const Query&) = default;
};

/// The parsed form of one SQL statement.
using SqlAst = Query;

std::string_view to_string(AggFunc f);
std::string_view to_string(CmpOp op);
std::string_view to_string(SetOp op);
std::string_view to_string(SortDir dir);

/// Tables named in FROM/JOIN, in order.
std::vector<std::string> from_tables(const SelectCore& core);
/// FROM tables followed by any other table a column of this core refers to
/// (nested queries excluded).
std::vector<std::string> scope_tables(const SelectCore& core);

/// Counts AST nodes; used to check that decomposition partitions a query.
std::size_t count_nodes(const Query& q);
std::size_t count_nodes(const Condition& c);
std::size_t count_nodes(const Operand& o);

}  // namespace clausewise
