#include "clausewise/sites.hpp"

namespace clausewise {

namespace {

struct Collector {
  std::vector<SiteRef> out;
  bool in_subquery = false;

  void value(ValueExpr& v) {
    if (v.column.is_star()) return;
    SiteRef s;
    s.kind = SiteRef::Kind::Column;
    s.column = &v.column;
    s.in_subquery = in_subquery;
    out.push_back(s);
  }

  void table(std::string& t) {
    SiteRef s;
    s.kind = SiteRef::Kind::Table;
    s.table = &t;
    s.in_subquery = in_subquery;
    out.push_back(s);
  }

  void operand(Operand& o) {
    if (auto* v = std::get_if<ValueExpr>(&o)) {
      value(*v);
    } else if (auto* l = std::get_if<Literal>(&o)) {
      SiteRef s;
      s.kind = SiteRef::Kind::Literal;
      s.literal = l;
      s.in_subquery = in_subquery;
      out.push_back(s);
    } else if (auto* q = std::get_if<Box<Query>>(&o); q && (*q)->is_core()) {
      auto& core = (*q)->core();
      const bool saved = in_subquery;
      in_subquery = true;
      for (auto& v : core.select) value(v);
      for (auto& j : core.from) table(j.table);
      in_subquery = saved;
    }
  }

  void condition(Condition& c) {
    if (c.kind != Condition::Kind::Predicate) {
      for (auto& child : c.children) condition(child);
      return;
    }
    auto& p = *c.predicate;
    value(p.lhs);
    operand(p.rhs);
    if (p.upper) operand(*p.upper);
  }
};

}  // namespace

std::vector<SiteRef> clause_sites(Clause& clause) {
  Collector c;
  switch (clause.kind) {
    case ClauseKind::FromJoinOn:
      for (auto& j : clause.from_body().joins) {
        c.table(j.table);
        if (j.on) c.condition(*j.on);
      }
      break;
    case ClauseKind::Where:
    case ClauseKind::Having: c.condition(clause.filter().condition); break;
    case ClauseKind::GroupBy:
      for (auto& v : clause.group().keys) c.value(v);
      break;
    case ClauseKind::Select:
      for (auto& v : clause.select_body().items) c.value(v);
      break;
    case ClauseKind::OrderBy: {
      auto& o = clause.order();
      if (o.order)
        for (auto& v : o.order->keys) c.value(v);
      if (o.limit) {
        SiteRef s;
        s.kind = SiteRef::Kind::Limit;
        s.limit = &*o.limit;
        c.out.push_back(s);
      }
      break;
    }
  }
  return std::move(c.out);
}

}  // namespace clausewise
