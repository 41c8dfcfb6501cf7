#include "clausewise/refine.hpp"

#include <memory>

#include "clausewise/compose.hpp"
#include "clausewise/errors.hpp"
#include "clausewise/text.hpp"

namespace clausewise {

StepDocument StepDocument::from(const Explanation& explanation) {
  StepDocument doc;
  for (std::size_t i = 0; i < explanation.steps.size(); ++i) doc.entries.push_back({explanation.steps[i].text, i});
  return doc;
}

void StepDocument::edit(std::size_t position, std::string text) { entries.at(position).text = std::move(text); }

void StepDocument::insert(std::size_t position, std::string text) {
  if (position > entries.size()) throw std::out_of_range("step position out of range");
  entries.insert(entries.begin() + static_cast<std::ptrdiff_t>(position), StepEntry{std::move(text), std::nullopt});
}

void StepDocument::erase(std::size_t position) {
  if (position >= entries.size()) throw std::out_of_range("step position out of range");
  entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(position));
}

namespace {

std::vector<std::string> bare_words(std::string_view text) {
  std::string cleaned;
  for (char c : text) cleaned.push_back(c == ':' || c == '.' || c == ',' ? ' ' : c);
  return text::split_words(text::lower(cleaned));
}

}  // namespace

std::optional<std::size_t> parse_header(std::string_view text) {
  const auto w = bare_words(text);
  if (w.size() != 4 || w[0] != "start" || w[1] != "the" || w[3] != "query") return std::nullopt;
  if (const std::size_t n = text::ordinal_value(w[2])) return n;
  return std::nullopt;
}

std::optional<SetOp> parse_combine(std::string_view text) {
  const std::string joined = " " + text::join(bare_words(text), " ") + " ";
  const bool of_them = joined.find(" of them ") != std::string::npos || joined.find(" queries ") != std::string::npos;
  if (of_them && joined.find(" intersection ") != std::string::npos) return SetOp::Intersect;
  if (of_them && joined.find(" union ") != std::string::npos) return SetOp::Union;
  if (joined.find(" but not in the second query ") != std::string::npos) return SetOp::Except;
  return std::nullopt;
}

std::string_view to_string(StepPath p) {
  switch (p) {
    case StepPath::Unchanged: return "unchanged";
    case StepPath::Direct: return "direct";
    case StepPath::Generated: return "generated";
    case StepPath::Structural: return "structural";
  }
  return "";
}

nlohmann::ordered_json to_json(const StepOutcome& outcome) {
  nlohmann::ordered_json j;
  j["path"] = std::string(to_string(outcome.path));
  j["edit"] = outcome.edit ? nlohmann::ordered_json(std::string(to_string(*outcome.edit))) : nlohmann::ordered_json();
  j["clause_kind"] = outcome.kind ? nlohmann::ordered_json(std::string(to_string(*outcome.kind))) : nlohmann::ordered_json();
  j["clause_sql"] = outcome.clause_sql;
  return j;
}

namespace {

struct Token {
  enum class Kind { Header, Combine, Clause };
  Kind kind = Kind::Clause;
  std::size_t ordinal = 0;
  SetOp op = SetOp::Union;
  std::size_t entry = 0;
};

/// Nesting read off the header and combining steps; leaves hold entry indices.
struct Skeleton {
  bool compound = false;
  SetOp op = SetOp::Union;
  std::shared_ptr<const Skeleton> left, right;
  std::vector<std::shared_ptr<const Skeleton>> blocks;
  std::vector<std::size_t> entries;
};
using Parse = std::pair<std::shared_ptr<const Skeleton>, std::size_t>;

class StructureParser {
 public:
  explicit StructureParser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::shared_ptr<const Skeleton> parse() {
    for (auto& [skel, end] : seq(0))
      if (end == toks_.size()) return skel;
    return nullptr;
  }

 private:
  bool is(std::size_t i, Token::Kind k) const { return i < toks_.size() && toks_[i].kind == k; }
  bool header(std::size_t i, std::size_t ordinal) const { return is(i, Token::Kind::Header) && toks_[i].ordinal == ordinal; }

  std::size_t clause_run(std::size_t i, std::vector<std::size_t>& entries) const {
    while (is(i, Token::Kind::Clause)) entries.push_back(toks_[i++].entry);
    return i;
  }

  std::vector<Parse> seq(std::size_t i) const {
    std::vector<Parse> out;
    if (is(i, Token::Kind::Clause)) {
      auto core = std::make_shared<Skeleton>();
      const std::size_t end = clause_run(i, core->entries);
      out.emplace_back(core, end);
      return out;
    }
    if (!header(i, 1)) return out;
    for (const auto& [first, j] : seq(i + 1)) {
      if (!header(j, 2)) continue;
      for (const auto& [second, k] : seq(j + 1)) {
        if (!is(k, Token::Kind::Combine)) continue;
        auto c = std::make_shared<Skeleton>();
        c->compound = true;
        c->op = toks_[k].op;
        c->left = first;
        c->right = second;
        out.emplace_back(c, k + 1);
      }
      blocked(j, {first}, out);
    }
    return out;
  }

  /// toks_[j] is the header numbered blocks.size() + 1.
  void blocked(std::size_t j, const std::vector<std::shared_ptr<const Skeleton>>& blocks, std::vector<Parse>& out) const {
    if (is(j + 1, Token::Kind::Clause)) {
      auto core = std::make_shared<Skeleton>();
      core->blocks = blocks;
      const std::size_t end = clause_run(j + 1, core->entries);
      out.emplace_back(core, end);
    }
    for (const auto& [block, k] : seq(j + 1)) {
      if (!header(k, blocks.size() + 2)) continue;
      auto more = blocks;
      more.push_back(block);
      blocked(k, more, out);
    }
  }

  std::vector<Token> toks_;
};

class Refiner {
 public:
  Refiner(const Explanation& shown, const StepDocument& doc, const SchemaCatalog& schema, ClauseGenerator& gen)
      : shown_(shown), doc_(doc), schema_(schema), gen_(gen), outcomes_(doc.entries.size()) {}

  RefineResult run() {
    if (doc_.entries.empty()) throw StepError(0, "structure", "there are no steps left");
    std::vector<Token> toks;
    for (std::size_t i = 0; i < doc_.entries.size(); ++i) toks.push_back(classify(i));
    const auto skeleton = StructureParser(toks).parse();
    if (!skeleton)
      throw StepError(0, "structure", "the \"Start the ... query\" and combining steps do not describe a valid nesting");

    RefineResult result;
    result.tree = build(*skeleton);
    try {
      ComposeOptions options;
      options.fill_missing_on = from_changed_;
      result.query = compose(result.tree, schema_, options);
    } catch (const ComposeError& e) {
      throw StepError(0, "compose", e.what());
    }
    result.outcomes = std::move(outcomes_);
    return result;
  }

 private:
  bool unchanged(std::size_t i) const {
    const auto& e = doc_.entries[i];
    return e.origin && *e.origin < shown_.steps.size() && shown_.steps[*e.origin].text == e.text;
  }

  const ExplanationStep* origin_step(std::size_t i) const {
    const auto& e = doc_.entries[i];
    return e.origin && *e.origin < shown_.steps.size() ? &shown_.steps[*e.origin] : nullptr;
  }

  Token classify(std::size_t i) {
    Token t;
    t.entry = i;
    const auto& text = doc_.entries[i].text;
    if (unchanged(i)) {
      const auto& slot = origin_step(i)->slot;
      if (slot.role == StepSlot::Role::BlockHeader) {
        t.kind = Token::Kind::Header;
        t.ordinal = slot.ordinal;
      } else if (slot.role == StepSlot::Role::Combine) {
        t.kind = Token::Kind::Combine;
        t.op = slot.op;
      }
    } else if (auto n = parse_header(text)) {
      t.kind = Token::Kind::Header;
      t.ordinal = *n;
    } else if (auto op = parse_combine(text)) {
      t.kind = Token::Kind::Combine;
      t.op = *op;
    }
    if (t.kind != Token::Kind::Clause) {
      outcomes_[i].path = unchanged(i) ? StepPath::Unchanged : StepPath::Structural;
      if (const auto* o = origin_step(i); o && !unchanged(i)) outcomes_[i].edit = EditClassification::Kind::Complex;
    }
    return t;
  }

  ClauseTree build(const Skeleton& s) {
    if (s.compound) return ClauseTree{CompoundTree{s.op, Box<ClauseTree>(build(*s.left)), Box<ClauseTree>(build(*s.right))}};
    CoreTree core;
    for (const auto& b : s.blocks) core.blocks.push_back(build(*b));

    const CoreTree* origin_core = nullptr;
    for (std::size_t i : s.entries)
      if (const auto* o = origin_step(i); o && o->slot.role == StepSlot::Role::Clause) {
        origin_core = &subtree(shown_.tree, o->slot.path).core();
        break;
      }
    std::vector<std::string> scope = origin_core ? core_scope(*origin_core) : std::vector<std::string>{};
    const std::vector<Clause> siblings = origin_core ? origin_core->clauses : std::vector<Clause>{};

    std::vector<std::optional<Clause>> clauses(s.entries.size());
    auto kind_of = [&](std::size_t i) -> std::optional<ClauseKind> {
      if (unchanged(i)) return origin_step(i)->kind;
      try {
        return infer_clause_type(doc_.entries[i].text);
      } catch (const GenerationError&) {
        return std::nullopt;
      }
    };
    // FROM steps first: they decide which tables the other steps' columns bind to.
    for (std::size_t k = 0; k < s.entries.size(); ++k)
      if (kind_of(s.entries[k]) == ClauseKind::FromJoinOn) {
        clauses[k] = resolve(s.entries[k], scope, siblings, core.blocks.size());
        if (outcomes_[s.entries[k]].path != StepPath::Unchanged) from_changed_ = true;
      }
    for (const auto& c : clauses)
      if (c && c->kind == ClauseKind::FromJoinOn) {
        scope.clear();
        for (const auto& j : c->from_body().joins) scope.push_back(j.table);
        break;
      }
    for (std::size_t k = 0; k < s.entries.size(); ++k)
      if (!clauses[k]) clauses[k] = resolve(s.entries[k], scope, siblings, core.blocks.size());
    for (auto& c : clauses) core.clauses.push_back(std::move(*c));
    return ClauseTree{std::move(core)};
  }

  Clause resolve(std::size_t i, const std::vector<std::string>& scope, const std::vector<Clause>& siblings,
                 std::size_t blocks) {
    const auto& entry = doc_.entries[i];
    auto& outcome = outcomes_[i];
    GenerationContext ctx{&schema_, scope, siblings, blocks, i + 1};
    auto finish = [&](Clause c, StepPath path) {
      outcome.path = path;
      outcome.kind = c.kind;
      outcome.clause_sql = render_clause(c, scope);
      return c;
    };
    auto generate = [&]() {
      try {
        return finish(generate_clause(entry.text, ctx, gen_), StepPath::Generated);
      } catch (const GenerationError& e) {
        throw StepError(i + 1, "generation", e.what(), e.retryable());
      }
    };

    const ExplanationStep* step = origin_step(i);
    if (!step || step->slot.role != StepSlot::Role::Clause) return generate();
    const Clause& original = subtree(shown_.tree, step->slot.path).core().clauses.at(step->slot.clause_index);
    if (unchanged(i)) return finish(original, StepPath::Unchanged);

    EditRequest request{*step, entry.text, original};
    const auto cls = classify_texts(request, schema_, scope);
    outcome.edit = cls.kind;
    if (cls.kind == EditClassification::Kind::NoChange) return finish(original, StepPath::Unchanged);
    if (cls.kind == EditClassification::Kind::Atomic) {
      try {
        Clause edited = direct_transform(request, cls, schema_);
        validate_clause(edited, ctx);
        return finish(std::move(edited), StepPath::Direct);
      } catch (const EditError&) {
      } catch (const GenerationError&) {
      }
    }
    return generate();
  }

  const Explanation& shown_;
  const StepDocument& doc_;
  const SchemaCatalog& schema_;
  ClauseGenerator& gen_;
  std::vector<StepOutcome> outcomes_;
  bool from_changed_ = false;
};

}  // namespace

RefineResult refine(const Explanation& shown, const StepDocument& document, const SchemaCatalog& schema,
                    ClauseGenerator& generator) {
  return Refiner(shown, document, schema, generator).run();
}

}  // namespace clausewise
