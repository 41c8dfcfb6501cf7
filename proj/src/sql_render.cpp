#include <algorithm>

#include "clausewise/sql.hpp"
#include "clausewise/text.hpp"

namespace clausewise {

namespace {

bool needs_qualifier(const ColumnRef& c, const SelectCore& core) {
  if (c.is_star()) return false;
  if (core.from.size() > 1) return true;
  return std::none_of(core.from.begin(), core.from.end(), [&](const JoinSpec& j) { return text::iequals(j.table, c.table); });
}

std::string render_column(const ColumnRef& c, const SelectCore& core) {
  if (c.is_star()) return "*";
  return needs_qualifier(c, core) ? c.table + "." + c.column : c.column;
}

int precedence(const Condition& c) {
  switch (c.kind) {
    case Condition::Kind::Or: return 1;
    case Condition::Kind::And: return 2;
    case Condition::Kind::Not: return 3;
    case Condition::Kind::Predicate: return 4;
  }
  return 4;
}

std::string render_query(const Query& q, const RenderOptions& options, bool nested);

std::string render_operand(const Operand& o, const SelectCore& core, const RenderOptions& options) {
  if (auto* v = std::get_if<ValueExpr>(&o)) return render_value(*v, core);
  if (auto* l = std::get_if<Literal>(&o)) return render_literal(*l);
  if (auto* q = std::get_if<Box<Query>>(&o)) return "(" + render_query(**q, options, true) + ")";
  return "q" + std::to_string(std::get<SubquerySlot>(o).index + 1);
}

std::string render_cond(const Condition& c, const SelectCore& core, const RenderOptions& options, int parent, bool right) {
  std::string out;
  switch (c.kind) {
    case Condition::Kind::Predicate: {
      const auto& p = *c.predicate;
      out = render_value(p.lhs, core) + " " + std::string(to_string(p.op)) + " " + render_operand(p.rhs, core, options);
      if (p.upper) out += " AND " + render_operand(*p.upper, core, options);
      return out;
    }
    case Condition::Kind::Not:
      out = "NOT " + render_cond(c.children[0], core, options, 3, false);
      break;
    case Condition::Kind::And:
    case Condition::Kind::Or: {
      const int mine = precedence(c);
      const std::string word = c.kind == Condition::Kind::And ? " AND " : " OR ";
      out = render_cond(c.children[0], core, options, mine, false) + word + render_cond(c.children[1], core, options, mine, true);
      break;
    }
  }
  const int mine = precedence(c);
  const bool binary = c.kind == Condition::Kind::And || c.kind == Condition::Kind::Or;
  if (mine < parent || (binary && mine == parent && right)) return "(" + out + ")";
  return out;
}

std::string render_core(const SelectCore& core, const RenderOptions& options) {
  std::string out = "SELECT ";
  if (core.distinct) out += "DISTINCT ";
  for (std::size_t i = 0; i < core.select.size(); ++i) {
    if (i) out += ", ";
    out += render_value(core.select[i], core);
  }
  for (std::size_t i = 0; i < core.from.size(); ++i) {
    out += i == 0 ? " FROM " : " JOIN ";
    out += core.from[i].table;
    if (core.from[i].on) out += " ON " + render_condition(*core.from[i].on, core, options);
  }
  if (core.where) out += " WHERE " + render_condition(*core.where, core, options);
  if (!core.group_by.empty()) {
    out += " GROUP BY ";
    for (std::size_t i = 0; i < core.group_by.size(); ++i) {
      if (i) out += ", ";
      out += render_value(core.group_by[i], core);
    }
  }
  if (core.having) out += " HAVING " + render_condition(*core.having, core, options);
  if (core.order_by) {
    out += " ORDER BY ";
    for (std::size_t i = 0; i < core.order_by->keys.size(); ++i) {
      if (i) out += ", ";
      out += render_value(core.order_by->keys[i], core);
    }
    if (core.order_by->dir != SortDir::None) out += " " + std::string(to_string(core.order_by->dir));
  }
  if (core.limit) out += " LIMIT " + std::to_string(*core.limit);
  return out;
}

std::string render_query(const Query& q, const RenderOptions& options, bool /*nested*/) {
  if (q.is_core()) return render_core(q.core(), options);
  const auto& c = q.compound();
  const std::string op = " " + std::string(to_string(c.op)) + " ";
  if (options.parenthesize_compounds)
    return "(" + render_query(*c.left, options, true) + ")" + op + "(" + render_query(*c.right, options, true) + ")";
  // SQLite: compound operands cannot be parenthesized, so a compound on the
  // right is wrapped as a derived table.
  std::string right = render_query(*c.right, options, true);
  if (!c.right->is_core()) right = "SELECT * FROM (" + right + ")";
  return render_query(*c.left, options, true) + op + right;
}

}  // namespace

std::string render_value(const ValueExpr& v, const SelectCore& core) {
  const std::string col = render_column(v.column, core);
  if (v.func == AggFunc::None) return col;
  return std::string(to_string(v.func)) + "(" + (v.distinct ? "DISTINCT " : "") + col + ")";
}

std::string render_literal(const Literal& l) {
  if (l.kind == Literal::Kind::Number) return l.text;
  std::string out = "'";
  for (char c : l.text) {
    out.push_back(c);
    if (c == '\'') out.push_back('\'');
  }
  return out + "'";
}

std::string render_condition(const Condition& c, const SelectCore& core, const RenderOptions& options) {
  return render_cond(c, core, options, 0, false);
}

std::string render_sql(const SqlAst& ast, const RenderOptions& options) { return render_query(ast, options, false); }

}  // namespace clausewise
