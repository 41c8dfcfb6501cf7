#include "clausewise/ast.hpp"

#include <algorithm>

#include "clausewise/text.hpp"

namespace clausewise {

Condition Condition::leaf(Predicate p) {
  Condition c;
  c.kind = Kind::Predicate;
  c.predicate = std::move(p);
  return c;
}

Condition Condition::both(Condition a, Condition b) {
  Condition c;
  c.kind = Kind::And;
  c.children.push_back(std::move(a));
  c.children.push_back(std::move(b));
  return c;
}

Condition Condition::either(Condition a, Condition b) {
  Condition c;
  c.kind = Kind::Or;
  c.children.push_back(std::move(a));
  c.children.push_back(std::move(b));
  return c;
}

Condition Condition::negate(Condition inner) {
  Condition c;
  c.kind = Kind::Not;
  c.children.push_back(std::move(inner));
  return c;
}

std::string_view to_string(AggFunc f) {
  switch (f) {
    case AggFunc::None: return "";
    case AggFunc::Count: return "COUNT";
    case AggFunc::Avg: return "AVG";
    case AggFunc::Max: return "MAX";
    case AggFunc::Min: return "MIN";
    case AggFunc::Sum: return "SUM";
  }
  return "";
}

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::In: return "IN";
    case CmpOp::NotIn: return "NOT IN";
    case CmpOp::Like: return "LIKE";
    case CmpOp::NotLike: return "NOT LIKE";
    case CmpOp::Between: return "BETWEEN";
  }
  return "";
}

std::string_view to_string(SetOp op) {
  switch (op) {
    case SetOp::Intersect: return "INTERSECT";
    case SetOp::Union: return "UNION";
    case SetOp::Except: return "EXCEPT";
  }
  return "";
}

std::string_view to_string(SortDir dir) {
  switch (dir) {
    case SortDir::None: return "";
    case SortDir::Asc: return "ASC";
    case SortDir::Desc: return "DESC";
  }
  return "";
}

std::vector<std::string> from_tables(const SelectCore& core) {
  std::vector<std::string> out;
  for (const auto& j : core.from) out.push_back(j.table);
  return out;
}

namespace {

void add_table(std::vector<std::string>& out, const std::string& t) {
  if (t.empty()) return;
  if (std::none_of(out.begin(), out.end(), [&](const std::string& x) { return text::iequals(x, t); })) out.push_back(t);
}

void collect(const ValueExpr& v, std::vector<std::string>& out) { add_table(out, v.column.table); }

void collect(const Condition& c, std::vector<std::string>& out) {
  if (c.kind == Condition::Kind::Predicate) {
    collect(c.predicate->lhs, out);
    auto operand = [&](const Operand& o) {
      if (auto* v = std::get_if<ValueExpr>(&o)) collect(*v, out);
    };
    operand(c.predicate->rhs);
    if (c.predicate->upper) operand(*c.predicate->upper);
    return;
  }
  for (const auto& child : c.children) collect(child, out);
}

}  // namespace

std::vector<std::string> scope_tables(const SelectCore& core) {
  std::vector<std::string> out = from_tables(core);
  for (const auto& j : core.from)
    if (j.on) collect(*j.on, out);
  if (core.where) collect(*core.where, out);
  for (const auto& v : core.group_by) collect(v, out);
  if (core.having) collect(*core.having, out);
  for (const auto& v : core.select) collect(v, out);
  if (core.order_by)
    for (const auto& v : core.order_by->keys) collect(v, out);
  return out;
}

std::size_t count_nodes(const Operand& o) {
  if (std::holds_alternative<Box<Query>>(o)) return count_nodes(*std::get<Box<Query>>(o));
  if (std::holds_alternative<SubquerySlot>(o)) return 0;
  return 1;
}

std::size_t count_nodes(const Condition& c) {
  std::size_t n = 1;
  if (c.kind == Condition::Kind::Predicate) {
    n += 1 + count_nodes(c.predicate->rhs);
    if (c.predicate->upper) n += count_nodes(*c.predicate->upper);
    return n;
  }
  for (const auto& child : c.children) n += count_nodes(child);
  return n;
}

std::size_t count_nodes(const Query& q) {
  if (!q.is_core()) {
    const auto& c = q.compound();
    return 1 + count_nodes(*c.left) + count_nodes(*c.right);
  }
  const auto& core = q.core();
  std::size_t n = 1 + core.select.size() + core.group_by.size();
  for (const auto& j : core.from) {
    n += 1;
    if (j.on) n += count_nodes(*j.on);
  }
  if (core.where) n += count_nodes(*core.where);
  if (core.having) n += count_nodes(*core.having);
  if (core.order_by) n += 1 + core.order_by->keys.size();
  if (core.limit) n += 1;
  return n;
}

}  // namespace clausewise
