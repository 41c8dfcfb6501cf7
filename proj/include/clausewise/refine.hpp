#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clausewise/ast.hpp"
#include "clausewise/clause_gen.hpp"
#include "clausewise/decompose.hpp"
#include "clausewise/editor.hpp"
#include "clausewise/explain.hpp"
#include "clausewise/schema.hpp"

namespace clausewise {

/// One step of the explanation as the user left it. `origin` is the index
/// (0-based) of the explanation step it started from; new steps have none.
struct StepEntry {
  std::string text;
  std::optional<std::size_t> origin;

  friend bool operator==(const StepEntry&, const StepEntry&) = default;
};

struct StepDocument {
  std::vector<StepEntry> entries;

  static StepDocument from(const Explanation& explanation);

  void edit(std::size_t position, std::string text);
  /// Inserts before `position` (== size() appends).
  void insert(std::size_t position, std::string text);
  void erase(std::size_t position);
};

/// Header ordinal of "Start the n-th query:" text, or nullopt.
std::optional<std::size_t> parse_header(std::string_view text);
/// Set operation of a combining step, or nullopt when the text is not one.
std::optional<SetOp> parse_combine(std::string_view text);

enum class StepPath { Unchanged, Direct, Generated, Structural };
std::string_view to_string(StepPath p);

struct StepOutcome {
  StepPath path = StepPath::Unchanged;
  /// Set when the step was an edit of an existing step.
  std::optional<EditClassification::Kind> edit;
  std::optional<ClauseKind> kind;
  std::string clause_sql;
};

struct RefineResult {
  ClauseTree tree;
  SqlAst query;
  std::vector<StepOutcome> outcomes;  // one per document entry
};

/// Turns an edited step document back into a query. Unchanged steps keep
/// their clause, atomic edits are applied directly, everything else goes to
/// `generator`; headers and combining steps rebuild the nesting. Throws StepError.
RefineResult refine(const Explanation& shown, const StepDocument& document, const SchemaCatalog& schema,
                    ClauseGenerator& generator);

nlohmann::ordered_json to_json(const StepOutcome& outcome);

}  // namespace clausewise
