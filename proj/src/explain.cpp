#include "clausewise/explain.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "clausewise/errors.hpp"
#include "clausewise/sites.hpp"
#include "clausewise/sql.hpp"
#include "clausewise/text.hpp"

namespace clausewise {

std::string_view to_string(SpanClass c) {
  switch (c) {
    case SpanClass::Column: return "column";
    case SpanClass::Table: return "table";
    case SpanClass::Literal: return "literal";
    case SpanClass::Keyword: return "keyword";
  }
  return "";
}

std::string header_text(std::size_t ordinal) { return "Start the " + text::ordinal_word(ordinal) + " query:"; }

std::string combine_text(SetOp op) {
  switch (op) {
    case SetOp::Intersect: return "Return the intersection of them";
    case SetOp::Union: return "Return the union of them";
    case SetOp::Except: return "Return the records in the first query but not in the second query";
  }
  return {};
}

namespace {

void add_table(std::vector<std::string>& out, const std::string& t) {
  if (!t.empty() && std::none_of(out.begin(), out.end(), [&](const std::string& x) { return text::iequals(x, t); }))
    out.push_back(t);
}

void referenced(const Condition& c, std::vector<std::string>& out) {
  if (c.kind != Condition::Kind::Predicate) {
    for (const auto& child : c.children) referenced(child, out);
    return;
  }
  add_table(out, c.predicate->lhs.column.table);
  for (const Operand* o : {&c.predicate->rhs, c.predicate->upper ? &*c.predicate->upper : nullptr})
    if (o)
      if (auto* v = std::get_if<ValueExpr>(o)) add_table(out, v->column.table);
}

class Writer {
 public:
  Writer(const SchemaCatalog& schema, std::vector<std::string> scope) : schema_(schema), scope_(std::move(scope)) {}

  void word(std::string_view w) { text_ += w; }

  void keyword(std::string_view phrase) {
    const std::size_t start = text_.size();
    text_ += phrase;
    spans_.push_back({start, text_.size(), std::string(phrase), SpanClass::Keyword, std::nullopt});
  }

  void entity(const std::string& shown, std::string entity, SpanClass cls, std::optional<std::size_t> site) {
    const std::size_t start = text_.size();
    text_ += shown;
    spans_.push_back({start, text_.size(), std::move(entity), cls, site});
  }

  std::size_t take_site() { return next_site_++; }

  void table(const std::string& t) { entity(schema_.table_phrase(t), t, SpanClass::Table, take_site()); }

  void value(const ValueExpr& v) {
    if (v.column.is_star()) {
      word(v.func == AggFunc::Count ? "the number of records" : "all the records");
      return;
    }
    switch (v.func) {
      case AggFunc::None: word("the "); break;
      case AggFunc::Count: word("the number of "); break;
      case AggFunc::Avg: word("the average value of "); break;
      case AggFunc::Max: word("the maximum value of "); break;
      case AggFunc::Min: word("the minimum value of "); break;
      case AggFunc::Sum: word("the sum value of "); break;
    }
    if (v.distinct) word("distinct ");
    const std::size_t site = take_site();
    entity(schema_.column_phrase(v.column.table, v.column.column), v.column.table + "." + v.column.column,
           SpanClass::Column, site);
    if (needs_table(v.column)) {
      word(" of ");
      entity(schema_.table_phrase(v.column.table), v.column.table, SpanClass::Table, std::nullopt);
    }
  }

  void values(const std::vector<ValueExpr>& items) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i > 0) word(i + 1 == items.size() ? " and " : ", ");
      value(items[i]);
    }
  }

  void literal(const Literal& l) {
    const std::string shown = l.kind == Literal::Kind::Number ? l.text : "\"" + l.text + "\"";
    entity(shown, render_literal(l), SpanClass::Literal, take_site());
  }

  void operand(const Operand& o) {
    if (auto* v = std::get_if<ValueExpr>(&o)) return value(*v);
    if (auto* l = std::get_if<Literal>(&o)) return literal(*l);
    if (auto* slot = std::get_if<SubquerySlot>(&o)) {
      word("the ");
      keyword(text::ordinal_word(slot->index + 1) + " query");
      return;
    }
    const Query& q = *std::get<Box<Query>>(o);
    if (!q.is_core()) throw ExplainError("a compound query cannot be explained inside a condition");
    const auto& sub = q.core();
    std::vector<std::string> saved = scope_;
    scope_ = from_tables(sub);
    values(sub.select);
    word(" in table ");
    table(sub.from.front().table);
    scope_ = std::move(saved);
  }

  void condition(const Condition& c, int parent = 0, bool right = false) {
    const int mine = c.kind == Condition::Kind::Or ? 1 : c.kind == Condition::Kind::And ? 2 : c.kind == Condition::Kind::Not ? 3 : 4;
    const bool binary = c.kind == Condition::Kind::And || c.kind == Condition::Kind::Or;
    const bool parens = mine < parent || (binary && mine == parent && right);
    if (parens) word("(");
    switch (c.kind) {
      case Condition::Kind::Predicate: predicate(*c.predicate); break;
      case Condition::Kind::Not:
        word("not ");
        condition(c.children[0], 3, false);
        break;
      case Condition::Kind::And:
      case Condition::Kind::Or:
        condition(c.children[0], mine, false);
        word(c.kind == Condition::Kind::And ? " and " : " or ");
        condition(c.children[1], mine, true);
        break;
    }
    if (parens) word(")");
  }

  void predicate(const Predicate& p) {
    value(p.lhs);
    word(" ");
    keyword(op_phrase(p.op));
    word(" ");
    operand(p.rhs);
    if (p.upper) {
      word(" and ");
      operand(*p.upper);
    }
  }

  ExplanationStep finish(ClauseKind kind) {
    ExplanationStep step;
    step.text = std::move(text_);
    step.spans = std::move(spans_);
    step.kind = kind;
    return step;
  }

 private:
  static std::string_view op_phrase(CmpOp op) {
    switch (op) {
      case CmpOp::Eq: return "is";
      case CmpOp::Ne: return "is not";
      case CmpOp::Gt: return "is greater than";
      case CmpOp::Ge: return "is greater than or equal to";
      case CmpOp::Lt: return "is less than";
      case CmpOp::Le: return "is less than or equal to";
      case CmpOp::In: return "is in";
      case CmpOp::NotIn: return "is not in";
      case CmpOp::Like: return "is in the form of";
      case CmpOp::NotLike: return "is not in the form of";
      case CmpOp::Between: return "is between";
    }
    return "";
  }

  bool needs_table(const ColumnRef& c) const {
    if (std::none_of(scope_.begin(), scope_.end(), [&](const std::string& t) { return text::iequals(t, c.table); }))
      return true;
    const std::string phrase = schema_.column_phrase(c.table, c.column);
    for (const auto& t : scope_) {
      if (text::iequals(t, c.table)) continue;
      const TableInfo* info = schema_.find_table(t);
      if (!info) continue;
      for (const auto& col : info->columns)
        if (text::iequals(col.name, c.column) || text::iequals(schema_.column_phrase(t, col.name), phrase)) return true;
    }
    return false;
  }

  const SchemaCatalog& schema_;
  std::vector<std::string> scope_;
  std::string text_;
  std::vector<Span> spans_;
  std::size_t next_site_ = 0;
};

}  // namespace

ExplainContext context_for(const CoreTree& core) {
  ExplainContext ctx;
  ctx.scope = core_scope(core);
  for (const auto& clause : core.clauses) {
    switch (clause.kind) {
      case ClauseKind::FromJoinOn:
        for (const auto& j : clause.from_body().joins)
          if (j.on) referenced(*j.on, ctx.scope);
        break;
      case ClauseKind::Where:
      case ClauseKind::Having: referenced(clause.filter().condition, ctx.scope); break;
      case ClauseKind::GroupBy:
        for (const auto& v : clause.group().keys) add_table(ctx.scope, v.column.table);
        break;
      case ClauseKind::Select:
        for (const auto& v : clause.select_body().items) add_table(ctx.scope, v.column.table);
        break;
      case ClauseKind::OrderBy:
        if (clause.order().order)
          for (const auto& v : clause.order().order->keys) add_table(ctx.scope, v.column.table);
        break;
    }
  }
  return ctx;
}

ExplanationStep explain_clause(const Clause& clause, const SchemaCatalog& schema, const ExplainContext& ctx) {
  Writer w(schema, ctx.scope);
  auto limit = [&](std::int64_t n, bool lead) {
    w.word(lead ? "Return the " : "return the ");
    if (n == 1) {
      w.word("first record");
      w.take_site();
      return;
    }
    w.word("top ");
    w.entity(std::to_string(n), std::to_string(n), SpanClass::Literal, w.take_site());
    w.word(" records");
  };
  switch (clause.kind) {
    case ClauseKind::FromJoinOn: {
      const auto& joins = clause.from_body().joins;
      if (joins.empty()) throw ExplainError("FROM clause without tables");
      for (std::size_t i = 0; i < joins.size(); ++i) {
        w.word(i == 0 ? "In table " : " and table ");
        w.table(joins[i].table);
        if (joins[i].on) {
          w.word(" where ");
          w.condition(*joins[i].on);
        }
      }
      break;
    }
    case ClauseKind::Where:
      w.word("Keep the records where ");
      w.condition(clause.filter().condition);
      break;
    case ClauseKind::GroupBy:
      w.word("Group the records based on ");
      w.values(clause.group().keys);
      break;
    case ClauseKind::Having:
      w.word("Keep the groups where ");
      w.condition(clause.filter().condition);
      break;
    case ClauseKind::Select:
      if (clause.select_body().items.empty()) throw ExplainError("SELECT clause without items");
      w.word("Return ");
      if (clause.select_body().distinct) w.word("distinct values of ");
      w.values(clause.select_body().items);
      break;
    case ClauseKind::OrderBy: {
      const auto& o = clause.order();
      if (o.order) {
        w.word("Sort the records based on ");
        w.values(o.order->keys);
        if (o.order->dir == SortDir::Asc) w.word(" in ascending order");
        if (o.order->dir == SortDir::Desc) w.word(" in descending order");
        if (o.limit) {
          w.word(" and ");
          limit(*o.limit, false);
        }
      } else if (o.limit) {
        limit(*o.limit, true);
      } else {
        throw ExplainError("ORDER BY clause without keys or limit");
      }
      break;
    }
  }
  return w.finish(clause.kind);
}

Explanation explain_query(const ClauseTree& tree, const SchemaCatalog& schema) {
  Explanation out;
  out.tree = tree;
  out.nesting_depth = nesting_depth(tree);
  for (const auto& slot : execution_order(tree)) {
    ExplanationStep step;
    switch (slot.role) {
      case StepSlot::Role::BlockHeader: step.text = header_text(slot.ordinal); break;
      case StepSlot::Role::Combine: step.text = combine_text(slot.op); break;
      case StepSlot::Role::Clause: {
        const auto& core = subtree(tree, slot.path).core();
        step = explain_clause(core.clauses[slot.clause_index], schema, context_for(core));
        break;
      }
    }
    step.slot = slot;
    step.index = out.steps.size() + 1;
    out.steps.push_back(std::move(step));
  }
  return out;
}

nlohmann::ordered_json to_json(const ExplanationStep& step) {
  nlohmann::ordered_json j;
  j["index"] = step.index;
  j["text"] = step.text;
  if (step.kind) j["clause_kind"] = std::string(to_string(*step.kind));
  else j["clause_kind"] = step.slot.role == StepSlot::Role::Combine ? "COMBINE" : "BLOCK";
  auto spans = nlohmann::ordered_json::array();
  for (const auto& s : step.spans) {
    nlohmann::ordered_json js;
    js["start"] = s.start;
    js["end"] = s.end;
    js["entity"] = s.entity;
    js["class"] = std::string(to_string(s.cls));
    spans.push_back(std::move(js));
  }
  j["spans"] = std::move(spans);
  return j;
}

nlohmann::ordered_json to_json(const Explanation& explanation) {
  nlohmann::ordered_json j;
  auto steps = nlohmann::ordered_json::array();
  for (const auto& s : explanation.steps) steps.push_back(to_json(s));
  j["steps"] = std::move(steps);
  j["nesting_depth"] = explanation.nesting_depth;
  j["deep_nesting"] = explanation.deep_nesting();
  return j;
}

const std::vector<TemplateWord>& template_words() {
  static const std::vector<TemplateWord> words = [] {
    std::vector<TemplateWord> w{
        {"return",
         {"get", "find", "find out", "discover", "show", "show me", "determine", "demonstrate", "give me", "obtain",
          "select", "choose", "search", "display", "list", "acquire", "gain"}},
        {"keep the records where", {"make", "make sure", "where", "filter the records where"}},
        {"greater than",
         {"more than", "exceed", "no less than", "over", "above", "larger than", "beyond", "in excess of", "transcend",
          "surpass"}},
        {"less than", {"lower than", "no more than", "below", "lesser", "under", "underneath", "not so much as", "beneath"}},
        {"ascending", {"increasing", "ascendant", "growing", "rising", "soaring", "climbing", "mounting"}},
        {"descending", {"decreasing", "descendant", "falling", "declining", "dropping", "lessening", "diminishing"}},
        {"maximum", {"max", "maximum", "utmost", "greatest", "most", "topmost", "highest", "top", "largest", "biggest"}},
        {"minimum", {"lowest", "smallest", "least", "min", "minimal", "bottom", "bottommost", "lowermost"}},
        {"number of", {"amount of", "quantity of", "total of"}},
        {"in the form of", {"appearing as", "with the appearance of", "in the shape of"}},
        {"that has", {"associated with", "connected to"}},
        {"based on", {"according to", "in terms of", "specified by", "built on", "established on", "considering", "regarding"}},
        {"distinct", {"different", "disparate", "distinctive", "particular", "diverse", "dissimilar", "unique"}},
        {"all", {"each", "every", "any", "whole", "entire", "total"}},
        {"group",
         {"batch", "organize", "categorize", "classify", "arrange", "separate", "label", "tag", "mark", "pack", "collect",
          "assemble", "distribute", "gather", "merge", "put together", "index", "concentrate", "combine"}},
        {"sort", {"order", "rank", "sequence"}},
    };
    return w;
  }();
  return words;
}

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

struct Occurrence {
  std::size_t start = 0;
  std::size_t end = 0;
  const TemplateWord* word = nullptr;
};

std::vector<Occurrence> find_template_words(const ExplanationStep& step) {
  const std::string lowered = text::lower(step.text);
  std::vector<Occurrence> found;
  for (const auto& tw : template_words()) {
    for (std::size_t pos = lowered.find(tw.word); pos != std::string::npos; pos = lowered.find(tw.word, pos + 1)) {
      const std::size_t end = pos + tw.word.size();
      if (pos > 0 && is_word_char(lowered[pos - 1])) continue;
      if (end < lowered.size() && is_word_char(lowered[end])) continue;
      const bool in_entity = std::any_of(step.spans.begin(), step.spans.end(), [&](const Span& s) {
        return s.cls != SpanClass::Keyword && pos < s.end && s.start < end;
      });
      if (!in_entity) found.push_back({pos, end, &tw});
    }
  }
  std::sort(found.begin(), found.end(), [](const Occurrence& a, const Occurrence& b) {
    return a.start != b.start ? a.start < b.start : a.end > b.end;
  });
  std::vector<Occurrence> kept;
  for (const auto& o : found)
    if (kept.empty() || o.start >= kept.back().end) kept.push_back(o);
  return kept;
}

}  // namespace

ExplanationStep paraphrase(const ExplanationStep& step, std::uint64_t seed, const ParaphraseOptions& options) {
  std::mt19937_64 rng(seed);
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  ExplanationStep out = step;
  std::string rebuilt;
  std::size_t cursor = 0;
  std::vector<Span> spans = step.spans;
  for (const auto& occ : find_template_words(step)) {
    if (!(unit() < options.probability)) continue;
    const auto& syns = occ.word->synonyms;
    const std::string& replacement = syns[static_cast<std::size_t>(rng() % syns.size())];
    rebuilt += step.text.substr(cursor, occ.start - cursor);
    rebuilt += replacement;
    cursor = occ.end;
    const std::ptrdiff_t delta = static_cast<std::ptrdiff_t>(replacement.size()) - static_cast<std::ptrdiff_t>(occ.end - occ.start);
    for (std::size_t i = 0; i < spans.size(); ++i) {
      const Span& original = step.spans[i];
      if (original.start >= occ.end) spans[i].start += delta;
      if (original.end >= occ.end) spans[i].end += delta;
    }
  }
  rebuilt += step.text.substr(cursor);
  out.text = std::move(rebuilt);
  out.spans = std::move(spans);
  return out;
}

}  // namespace clausewise
