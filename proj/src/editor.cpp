#include "clausewise/editor.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "clausewise/errors.hpp"
#include "clausewise/sites.hpp"
#include "clausewise/text.hpp"

namespace clausewise {

std::string_view to_string(ChunkClass c) {
  switch (c) {
    case ChunkClass::Column: return "column";
    case ChunkClass::Table: return "table";
    case ChunkClass::Literal: return "literal";
    case ChunkClass::Other: return "other";
  }
  return "";
}

std::string_view to_string(EditClassification::Kind k) {
  switch (k) {
    case EditClassification::Kind::NoChange: return "NO_CHANGE";
    case EditClassification::Kind::Atomic: return "ATOMIC";
    case EditClassification::Kind::Complex: return "COMPLEX";
  }
  return "";
}

const std::vector<std::string>& operator_phrases() {
  static const std::vector<std::string> phrases = [] {
    std::vector<std::string> p{"is greater than or equal to", "is less than or equal to", "is not in the form of",
                               "is in the form of", "is greater than", "is less than", "is between", "is not in",
                               "is in", "is not"};
    std::stable_sort(p.begin(), p.end(), [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    return p;
  }();
  return phrases;
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return c == ',' || c == '(' || c == ')' || c == ':' || c == ';'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool word_end(std::string_view s, std::size_t i) { return i >= s.size() || is_space(s[i]) || is_punct(s[i]); }

struct EntityEntry {
  ChunkClass cls;
  std::string table;
  std::string column;
};

class PhraseIndex {
 public:
  explicit PhraseIndex(const SchemaCatalog& schema) {
    for (const auto& t : schema.tables()) {
      add(schema.table_phrase(t.name), {ChunkClass::Table, t.name, ""});
      add(t.name, {ChunkClass::Table, t.name, ""});
      for (const auto& c : t.columns) {
        add(schema.column_phrase(t.name, c.name), {ChunkClass::Column, t.name, c.name});
        add(c.name, {ChunkClass::Column, t.name, c.name});
      }
    }
  }

  const std::vector<EntityEntry>* find(const std::string& phrase) const {
    auto it = entries_.find(phrase);
    return it == entries_.end() ? nullptr : &it->second;
  }
  std::size_t max_words() const { return max_words_; }

 private:
  void add(const std::string& phrase, EntityEntry e) {
    const std::string key = text::lower(phrase);
    auto& list = entries_[key];
    for (const auto& x : list)
      if (x.cls == e.cls && x.table == e.table && x.column == e.column) return;
    list.push_back(std::move(e));
    max_words_ = std::max(max_words_, text::split_words(key).size());
  }

  std::map<std::string, std::vector<EntityEntry>> entries_;
  std::size_t max_words_ = 1;
};

/// Word tokens (start, end) beginning at `pos`, stopping at punctuation or quotes.
std::vector<std::pair<std::size_t, std::size_t>> words_from(std::string_view s, std::size_t pos, std::size_t limit) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = pos;
  while (out.size() < limit && i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    if (i >= s.size() || is_punct(s[i]) || s[i] == '"') break;
    const std::size_t start = i;
    while (i < s.size() && !is_space(s[i]) && !is_punct(s[i]) && s[i] != '"') ++i;
    out.emplace_back(start, i);
  }
  return out;
}

const EntityEntry* pick_entity(const std::vector<EntityEntry>& candidates, bool prefer_table,
                               const std::vector<std::string>& preferred) {
  auto best_of = [&](ChunkClass cls) -> const EntityEntry* {
    for (const auto& t : preferred)
      for (const auto& e : candidates)
        if (e.cls == cls && text::iequals(e.table, t)) return &e;
    for (const auto& e : candidates)
      if (e.cls == cls) return &e;
    return nullptr;
  };
  const EntityEntry* first = best_of(prefer_table ? ChunkClass::Table : ChunkClass::Column);
  return first ? first : best_of(prefer_table ? ChunkClass::Column : ChunkClass::Table);
}

Literal literal_from_sql(const std::string& sql) {
  if (!sql.empty() && sql.front() == '\'') {
    std::string inner;
    for (std::size_t i = 1; i + 1 < sql.size(); ++i) {
      inner.push_back(sql[i]);
      if (sql[i] == '\'' && i + 2 < sql.size() && sql[i + 1] == '\'') ++i;
    }
    return Literal::string(inner);
  }
  return Literal::number(sql);
}

std::string normalized(const Chunk& c) {
  if (c.cls == ChunkClass::Literal) return c.text;
  std::vector<std::string> words = text::split_words(text::lower(c.text));
  auto article = [](const std::string& w) { return w == "the" || w == "a" || w == "an"; };
  while (!words.empty() && article(words.front())) words.erase(words.begin());
  while (!words.empty() && article(words.back())) words.pop_back();
  std::string out = text::join(words, " ");
  if (out == ",") out = "and";
  return out;
}

bool ignorable(const Chunk& c) {
  if (c.cls != ChunkClass::Other) return false;
  const std::string n = normalized(c);
  return n.empty() || n == "and";
}

}  // namespace

ChunkSequence chunk(std::string_view text, const SchemaCatalog& schema, const ChunkOptions& options) {
  const PhraseIndex index(schema);
  const std::string lowered = text::lower(text);
  ChunkSequence out;
  auto push = [&](std::size_t start, std::size_t end, ChunkClass cls) {
    Chunk c;
    c.text = std::string(text.substr(start, end - start));
    c.cls = cls;
    c.start = start;
    c.end = end;
    out.push_back(std::move(c));
    return &out.back();
  };

  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    if (is_punct(text[i])) {
      push(i, i + 1, ChunkClass::Other);
      ++i;
      continue;
    }
    if (text[i] == '"') {
      const std::size_t close = text.find('"', i + 1);
      const std::size_t end = close == std::string_view::npos ? text.size() : close + 1;
      Chunk* c = push(i, end, ChunkClass::Literal);
      const std::size_t inner_end = close == std::string_view::npos ? text.size() : close;
      c->literal = Literal::string(std::string(text.substr(i + 1, inner_end - i - 1)));
      i = end;
      continue;
    }
    if (is_digit(text[i]) || (text[i] == '-' && i + 1 < text.size() && is_digit(text[i + 1]))) {
      std::size_t j = i + 1;
      while (j < text.size() && (is_digit(text[j]) || text[j] == '.')) ++j;
      if (word_end(text, j) && text[j - 1] != '.') {
        Chunk* c = push(i, j, ChunkClass::Literal);
        c->literal = Literal::number(c->text);
        i = j;
        continue;
      }
    }
    bool matched = false;
    for (const auto& phrase : operator_phrases()) {
      if (lowered.compare(i, phrase.size(), phrase) == 0 && word_end(text, i + phrase.size())) {
        push(i, i + phrase.size(), ChunkClass::Other);
        i += phrase.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;

    const auto words = words_from(text, i, index.max_words());
    if (words.empty()) {
      push(i, i + 1, ChunkClass::Other);
      ++i;
      continue;
    }
    const std::string previous = out.empty() ? "" : text::lower(out.back().text);
    const bool prefer_table = previous == "table" || previous == "of";
    for (std::size_t k = words.size(); k >= 1 && !matched; --k) {
      std::string phrase;
      for (std::size_t w = 0; w < k; ++w) phrase += (w ? " " : "") + lowered.substr(words[w].first, words[w].second - words[w].first);
      const auto* candidates = index.find(phrase);
      if (!candidates) continue;
      const EntityEntry* e = pick_entity(*candidates, prefer_table, options.preferred_tables);
      Chunk* c = push(words[0].first, words[k - 1].second, e->cls);
      c->binding = ColumnRef{e->table, e->column};
      i = words[k - 1].second;
      matched = true;
    }
    if (matched) continue;
    push(words[0].first, words[0].second, ChunkClass::Other);
    i = words[0].second;
  }

  if (options.spans) {
    for (auto& c : out) {
      for (const auto& s : *options.spans) {
        if (s.start != c.start || s.end != c.end || s.cls == SpanClass::Keyword) continue;
        c.site = s.site;
        if (s.cls == SpanClass::Column) {
          const auto dot = s.entity.find('.');
          c.cls = ChunkClass::Column;
          c.binding = ColumnRef{s.entity.substr(0, dot), s.entity.substr(dot + 1)};
        } else if (s.cls == SpanClass::Table) {
          c.cls = ChunkClass::Table;
          c.binding = ColumnRef{s.entity, ""};
        } else {
          c.cls = ChunkClass::Literal;
          c.literal = literal_from_sql(s.entity);
          c.binding.reset();
        }
      }
    }
  }

  // "{col} of {T}" names one column.
  ChunkSequence merged;
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k + 2 < out.size() && out[k].cls == ChunkClass::Column && out[k].binding && text::lower(out[k + 1].text) == "of" &&
        out[k + 2].cls == ChunkClass::Table && out[k + 2].binding &&
        schema.find_column(out[k + 2].binding->table, out[k].binding->column)) {
      Chunk c = out[k];
      c.end = out[k + 2].end;
      c.text = std::string(text.substr(c.start, c.end - c.start));
      c.binding = ColumnRef{out[k + 2].binding->table, out[k].binding->column};
      c.qualified = true;
      merged.push_back(std::move(c));
      k += 2;
      continue;
    }
    merged.push_back(std::move(out[k]));
  }
  return merged;
}

bool chunks_match(const Chunk& a, const Chunk& b) {
  if ((a.cls == ChunkClass::Literal) != (b.cls == ChunkClass::Literal)) return false;
  return normalized(a) == normalized(b);
}

int chunk_score(const Chunk& a, const Chunk& b) {
  if (chunks_match(a, b)) return 2;
  if (a.is_entity() && a.cls == b.cls) return 1;
  return -1;
}

std::vector<AlignedPair> align(const ChunkSequence& a, const ChunkSequence& b, TieBreak ties) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<int>> dp(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 1; i <= n; ++i) dp[i][0] = dp[i - 1][0] + kGapScore;
  for (std::size_t j = 1; j <= m; ++j) dp[0][j] = dp[0][j - 1] + kGapScore;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      dp[i][j] = std::max({dp[i - 1][j - 1] + chunk_score(a[i - 1], b[j - 1]), dp[i - 1][j] + kGapScore,
                           dp[i][j - 1] + kGapScore});

  std::vector<AlignedPair> out;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (ties == TieBreak::Deletion && i > 0 && dp[i][j] == dp[i - 1][j] + kGapScore) {
      out.push_back({a[i - 1], std::nullopt});
      --i;
    } else if (i > 0 && j > 0 && dp[i][j] == dp[i - 1][j - 1] + chunk_score(a[i - 1], b[j - 1])) {
      out.push_back({a[i - 1], b[j - 1]});
      --i;
      --j;
    } else if (i > 0 && dp[i][j] == dp[i - 1][j] + kGapScore) {
      out.push_back({a[i - 1], std::nullopt});
      --i;
    } else {
      out.push_back({std::nullopt, b[j - 1]});
      --j;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

int alignment_score(const std::vector<AlignedPair>& pairs) {
  int score = 0;
  for (const auto& p : pairs) score += p.original && p.edited ? chunk_score(*p.original, *p.edited) : kGapScore;
  return score;
}

EditClassification classify_edit(const std::vector<AlignedPair>& pairs) {
  EditClassification out;
  auto complex = [] { return EditClassification{EditClassification::Kind::Complex, {}}; };
  for (const auto& p : pairs) {
    if (p.original && p.edited) {
      if (chunks_match(*p.original, *p.edited)) continue;
      if (p.original->is_entity() && p.original->cls == p.edited->cls) {
        out.edits.push_back({AtomicEdit::Kind::Replace, p.original, p.edited});
        continue;
      }
      return complex();
    }
    const Chunk& c = p.original ? *p.original : *p.edited;
    if (ignorable(c)) continue;
    if (c.cls != ChunkClass::Column) return complex();
    if (p.original) out.edits.push_back({AtomicEdit::Kind::RemoveColumn, p.original, std::nullopt});
    else out.edits.push_back({AtomicEdit::Kind::AddColumn, std::nullopt, p.edited});
  }
  out.kind = out.edits.empty() ? EditClassification::Kind::NoChange : EditClassification::Kind::Atomic;
  return out;
}

EditClassification classify_texts(const EditRequest& request, const SchemaCatalog& schema,
                                  const std::vector<std::string>& preferred_tables) {
  ChunkOptions original_options;
  original_options.spans = &request.original.spans;
  original_options.preferred_tables = preferred_tables;
  ChunkOptions edited_options;
  edited_options.preferred_tables = preferred_tables;
  const auto before = chunk(request.original.text, schema, original_options);
  const auto after = chunk(request.edited, schema, edited_options);
  auto fits = [&](const EditClassification& c) {
    try {
      direct_transform(request, c, schema);
      return true;
    } catch (const EditError&) {
      return false;
    }
  };
  auto first = classify_edit(align(before, after));
  if (first.kind != EditClassification::Kind::Atomic || fits(first)) return first;
  auto second = classify_edit(align(before, after, TieBreak::Deletion));
  if (second.kind == EditClassification::Kind::Atomic && fits(second)) return second;
  return first;
}

namespace {

/// Position of a list item addressed by a site, for clauses whose body is a value list.
std::vector<ValueExpr>* item_list(Clause& clause) {
  switch (clause.kind) {
    case ClauseKind::Select: return &clause.select_body().items;
    case ClauseKind::GroupBy: return &clause.group().keys;
    case ClauseKind::OrderBy: return clause.order().order ? &clause.order().order->keys : nullptr;
    default: return nullptr;
  }
}

std::optional<std::size_t> item_for_site(const std::vector<ValueExpr>& items, std::size_t site) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].column.is_star()) continue;
    if (seen == site) return i;
    ++seen;
  }
  return std::nullopt;
}

ColumnRef replacement_column(const ColumnRef& current, const Chunk& to, const SchemaCatalog& schema) {
  if (!to.binding) throw EditError(EditError::Kind::InvalidResult, "'" + to.text + "' does not name a column");
  if (to.qualified) return *to.binding;
  if (const TableInfo* t = schema.find_table(current.table)) {
    for (const auto& c : t->columns)
      if (text::iequals(c.name, to.binding->column) || text::iequals(schema.column_phrase(t->name, c.name), to.text))
        return {t->name, c.name};
  }
  return *to.binding;
}

void check_patterns(const Condition& c) {
  if (c.kind != Condition::Kind::Predicate) {
    for (const auto& child : c.children) check_patterns(child);
    return;
  }
  const auto& p = *c.predicate;
  if (p.op != CmpOp::Like && p.op != CmpOp::NotLike) return;
  const auto* l = std::get_if<Literal>(&p.rhs);
  if (!l || l->kind != Literal::Kind::String) throw EditError(EditError::Kind::InvalidResult, "LIKE needs a quoted pattern");
}

}  // namespace

Clause direct_transform(const EditRequest& request, const EditClassification& classification, const SchemaCatalog& schema) {
  if (classification.kind == EditClassification::Kind::Complex)
    throw EditError(EditError::Kind::InvalidResult, "complex edits need clause generation");
  Clause s = request.clause;
  if (classification.kind == EditClassification::Kind::NoChange) return s;

  auto sites = clause_sites(s);
  auto site_of = [&](const Chunk& c) -> SiteRef& {
    if (!c.site || *c.site >= sites.size())
      throw EditError(EditError::Kind::TargetNotFound, "'" + c.text + "' is not an entity of the clause");
    return sites[*c.site];
  };

  std::vector<std::size_t> removals;
  std::vector<ColumnRef> additions;
  for (const auto& edit : classification.edits) {
    switch (edit.kind) {
      case AtomicEdit::Kind::Replace: {
        const Chunk& from = *edit.from;
        const Chunk& to = *edit.to;
        SiteRef& site = site_of(from);
        switch (site.kind) {
          case SiteRef::Kind::Column:
            *site.column = replacement_column(*site.column, to, schema);
            break;
          case SiteRef::Kind::Table:
            if (!to.binding) throw EditError(EditError::Kind::InvalidResult, "'" + to.text + "' does not name a table");
            *site.table = to.binding->table;
            break;
          case SiteRef::Kind::Literal:
            *site.literal = *to.literal;
            break;
          case SiteRef::Kind::Limit: {
            const std::string& t = to.literal->text;
            if (to.literal->kind != Literal::Kind::Number || !text::is_number(t) || t.find('.') != std::string::npos ||
                t.front() == '-' || std::stoll(t) <= 0)
              throw EditError(EditError::Kind::InvalidResult, "LIMIT needs a positive integer");
            *site.limit = std::stoll(t);
            break;
          }
        }
        break;
      }
      case AtomicEdit::Kind::RemoveColumn: {
        const SiteRef& site = site_of(*edit.from);
        auto* list = item_list(s);
        if (site.kind != SiteRef::Kind::Column || site.in_subquery || !list)
          throw EditError(EditError::Kind::TargetNotFound, "'" + edit.from->text + "' is not a list item");
        const auto item = item_for_site(*list, *edit.from->site);
        if (!item || (*list)[*item].func != AggFunc::None)
          throw EditError(EditError::Kind::TargetNotFound, "'" + edit.from->text + "' is not a plain list item");
        removals.push_back(*item);
        break;
      }
      case AtomicEdit::Kind::AddColumn:
        if (s.kind != ClauseKind::Select)
          throw EditError(EditError::Kind::NotSelectClause, "columns can only be added to a SELECT clause");
        if (!edit.to->binding) throw EditError(EditError::Kind::InvalidResult, "'" + edit.to->text + "' is not a column");
        additions.push_back(*edit.to->binding);
        break;
    }
  }

  if (s.kind == ClauseKind::Where || s.kind == ClauseKind::Having) check_patterns(s.filter().condition);

  if (!removals.empty()) {
    auto* list = item_list(s);
    std::sort(removals.rbegin(), removals.rend());
    removals.erase(std::unique(removals.begin(), removals.end()), removals.end());
    for (std::size_t idx : removals) list->erase(list->begin() + static_cast<std::ptrdiff_t>(idx));
    if (list->empty()) {
      if (s.kind == ClauseKind::Select) throw EditError(EditError::Kind::EmptySelect, "the SELECT list would be empty");
      throw EditError(EditError::Kind::InvalidResult, "the clause would be empty");
    }
  }
  for (const auto& c : additions) s.select_body().items.push_back(ValueExpr{AggFunc::None, false, c});
  return s;
}

}  // namespace clausewise
