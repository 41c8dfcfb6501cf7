#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "clausewise/decompose.hpp"
#include "clausewise/explain.hpp"
#include "clausewise/sites.hpp"
#include "support/random_query.hpp"

namespace clausewise::fixtures {

/// A clause, its explanation step, and the same clause changed by one atomic
/// edit made directly on the AST. `edited_text` is the explanation of the
/// changed clause, i.e. what a user would type to ask for that change.
struct AtomicEditCase {
  Clause clause;
  ExplanationStep step;
  std::vector<std::string> scope;
  Clause expected;
  std::string edited_text;
  std::string description;
};

class AtomicEdits {
 public:
  AtomicEdits(const SchemaCatalog& schema, std::uint64_t seed) : schema_(schema), queries_(schema, seed), rng_(seed ^ 0x5EED) {}

  /// Draws until an editable clause turns up.
  AtomicEditCase next() {
    for (;;)
      if (auto c = attempt()) return *c;
  }

 private:
  std::optional<AtomicEditCase> attempt() {
    const auto tree = decompose(queries_.query());
    const auto explanation = explain_query(tree, schema_);
    std::vector<const ExplanationStep*> clause_steps;
    for (const auto& s : explanation.steps)
      if (s.kind) clause_steps.push_back(&s);
    const auto& step = *clause_steps[pick(clause_steps.size())];
    const auto& core = subtree(tree, step.slot.path).core();
    AtomicEditCase out;
    out.clause = core.clauses[step.slot.clause_index];
    out.step = step;
    out.scope = core_scope(core);
    out.expected = out.clause;

    const bool select = out.clause.kind == ClauseKind::Select;
    const int choice = static_cast<int>(pick(select ? 4 : 2));
    bool ok = false;
    if (choice == 0) ok = substitute_entity(out);
    else if (choice == 1) ok = substitute_value(out);
    else if (choice == 2) ok = add_column(out);
    else ok = remove_column(out);
    if (!ok) return std::nullopt;
    out.edited_text = explain_clause(out.expected, schema_, context_for(core)).text;
    if (out.edited_text == step.text) return std::nullopt;
    return out;
  }

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  std::vector<ColumnRef> mentioned(Clause& clause) {
    std::vector<ColumnRef> out;
    for (const auto& site : clause_sites(clause))
      if (site.kind == SiteRef::Kind::Column) out.push_back(*site.column);
    return out;
  }

  bool substitute_entity(AtomicEditCase& c) {
    auto sites = clause_sites(c.expected);
    std::vector<SiteRef> columns;
    for (const auto& s : sites)
      if (s.kind == SiteRef::Kind::Column && !s.in_subquery && !s.column->is_star()) columns.push_back(s);
    if (columns.empty()) return false;
    const auto site = columns[pick(columns.size())];
    const auto used = mentioned(c.expected);
    const auto* info = schema_.find_column(site.column->table, site.column->column);
    const auto* table = schema_.find_table(site.column->table);
    std::vector<std::string> candidates;
    for (const auto& col : table->columns) {
      if (col.type != info->type) continue;
      const ColumnRef ref{table->name, col.name};
      if (std::find(used.begin(), used.end(), ref) != used.end()) continue;
      candidates.push_back(col.name);
    }
    if (candidates.empty()) return false;
    const std::string from = site.column->column;
    site.column->column = candidates[pick(candidates.size())];
    c.description = "column " + from + " -> " + site.column->column;
    return true;
  }

  bool substitute_value(AtomicEditCase& c) {
    auto sites = clause_sites(c.expected);
    std::vector<SiteRef> values;
    for (const auto& s : sites) {
      if (s.in_subquery) continue;
      if (s.kind == SiteRef::Kind::Literal) values.push_back(s);
      if (s.kind == SiteRef::Kind::Limit && *s.limit > 1) values.push_back(s);
    }
    if (values.empty()) return false;
    const auto site = values[pick(values.size())];
    if (site.kind == SiteRef::Kind::Limit) {
      const auto from = *site.limit;
      *site.limit = from + 1 + static_cast<std::int64_t>(pick(5));
      c.description = "limit " + std::to_string(from) + " -> " + std::to_string(*site.limit);
      return true;
    }
    Literal& lit = *site.literal;
    const std::string from = lit.text;
    if (lit.kind == Literal::Kind::Number) {
      lit.text = std::to_string(std::stoll(from) + 1 + static_cast<long long>(pick(90)));
    } else {
      static const std::vector<std::string> words{"Rome", "Ada", "Blues", "Kyiv", "Kim", "Art", "Soul", "Quito"};
      const bool pattern = !from.empty() && from.front() == '%';
      const std::string word = words[pick(words.size())];
      lit.text = pattern ? "%" + word + "%" : word;
    }
    if (lit.text == from) return false;
    c.description = "literal " + from + " -> " + lit.text;
    return true;
  }

  bool add_column(AtomicEditCase& c) {
    auto& items = c.expected.select_body().items;
    if (std::any_of(items.begin(), items.end(), [](const ValueExpr& v) { return v.column.is_star(); })) return false;
    const auto used = mentioned(c.expected);
    std::vector<ColumnRef> candidates;
    for (const auto& t : c.scope)
      for (const auto& col : schema_.find_table(t)->columns) {
        const ColumnRef ref{t, col.name};
        if (std::find(used.begin(), used.end(), ref) == used.end()) candidates.push_back(ref);
      }
    if (candidates.empty()) return false;
    const auto ref = candidates[pick(candidates.size())];
    items.push_back(ValueExpr{AggFunc::None, false, ref});
    c.description = "add column " + ref.table + "." + ref.column;
    return true;
  }

  bool remove_column(AtomicEditCase& c) {
    auto& items = c.expected.select_body().items;
    if (items.size() < 2) return false;
    const auto at = pick(items.size());
    if (items[at].func != AggFunc::None || items[at].column.is_star()) return false;
    c.description = "remove column " + items[at].column.column;
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(at));
    return true;
  }

  const SchemaCatalog& schema_;
  RandomQueries queries_;
  std::mt19937_64 rng_;
};

}  // namespace clausewise::fixtures
