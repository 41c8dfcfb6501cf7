#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clausewise/decompose.hpp"
#include "clausewise/schema.hpp"

namespace clausewise {

enum class SpanClass { Column, Table, Literal, Keyword };

std::string_view to_string(SpanClass c);

/// A stretch of step text that stands for one SQL element.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string entity;  // "table.column", "table", the SQL literal, or the keyword phrase
  SpanClass cls = SpanClass::Keyword;
  /// Ordinal into clause_sites() for column/table/literal spans.
  std::optional<std::size_t> site;

  friend bool operator==(const Span&, const Span&) = default;
};

struct ExplanationStep {
  std::size_t index = 0;  // 1-based
  std::string text;
  std::vector<Span> spans;
  StepSlot slot;
  /// Set for clause steps; headers and combining steps have none.
  std::optional<ClauseKind> kind;

  friend bool operator==(const ExplanationStep&, const ExplanationStep&) = default;
};

struct Explanation {
  std::vector<ExplanationStep> steps;
  ClauseTree tree;
  int nesting_depth = 0;

  /// Nested compounds/blocks more than two levels deep.
  bool deep_nesting() const { return nesting_depth > 2; }
};

/// Tables whose column names decide when a column needs "of {table}" to be unambiguous.
struct ExplainContext {
  std::vector<std::string> scope;
};

/// Context for a clause of `core`: its FROM tables plus every other table its clauses name.
ExplainContext context_for(const CoreTree& core);

ExplanationStep explain_clause(const Clause& clause, const SchemaCatalog& schema, const ExplainContext& ctx);
Explanation explain_query(const ClauseTree& tree, const SchemaCatalog& schema);

std::string header_text(std::size_t ordinal);
std::string combine_text(SetOp op);

nlohmann::ordered_json to_json(const ExplanationStep& step);
nlohmann::ordered_json to_json(const Explanation& explanation);

/// Template words that may be swapped for a synonym, each with its synonyms.
struct TemplateWord {
  std::string word;
  std::vector<std::string> synonyms;
};
const std::vector<TemplateWord>& template_words();

struct ParaphraseOptions {
  /// Chance that each template word occurrence is replaced.
  double probability = 0.5;
};

/// Independently replaces each template word outside entity spans with a
/// uniformly drawn synonym (lower case). Spans are shifted to the new text.
ExplanationStep paraphrase(const ExplanationStep& step, std::uint64_t seed, const ParaphraseOptions& options = {});

}  // namespace clausewise
