#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "clausewise/decompose.hpp"
#include "clausewise/schema.hpp"

namespace clausewise {

struct GenerationContext {
  const SchemaCatalog* schema = nullptr;
  /// FROM tables of the core the clause will join; columns bind here first.
  std::vector<std::string> scope;
  /// Other clauses of the same core, for backends that condition on them.
  std::vector<Clause> siblings;
  /// Number of lifted subquery blocks the core has ("the n-th query" must exist).
  std::size_t block_count = 0;
  /// 1-based position of the step in the explanation.
  std::size_t position = 0;
};

/// Kind named by the step's cue phrase, after synonym normalization. Throws
/// GenerationError(Unclassifiable).
ClauseKind infer_clause_type(std::string_view text);

class ClauseGenerator {
 public:
  virtual ~ClauseGenerator() = default;
  virtual Clause generate(std::string_view text, const GenerationContext& ctx) = 0;
  virtual std::string name() const = 0;
};

/// Reverses the explanation templates: cue phrase -> clause kind, synonym-aware
/// phrase grammar for each kind, schema-bound entities.
class RuleBasedGenerator final : public ClauseGenerator {
 public:
  Clause generate(std::string_view text, const GenerationContext& ctx) override;
  std::string name() const override { return "rule-based"; }
};

/// Posts {explanation, schema_id, clause_kind_hint, sibling_sql} to a URL and
/// expects {clause_sql} back.
class RemoteGenerator final : public ClauseGenerator {
 public:
  explicit RemoteGenerator(std::string url, std::chrono::milliseconds timeout = std::chrono::seconds(10));
  Clause generate(std::string_view text, const GenerationContext& ctx) override;
  std::string name() const override { return "remote"; }

 private:
  std::string url_;
  std::chrono::milliseconds timeout_;
};

/// Runs the backend and rejects output that does not fit the schema or context.
Clause generate_clause(std::string_view text, const GenerationContext& ctx, ClauseGenerator& backend);

/// Checks every column/table of the clause against the schema and every
/// subquery slot against the context. Throws GenerationError(InvalidOutput).
void validate_clause(const Clause& clause, const GenerationContext& ctx);

}  // namespace clausewise
