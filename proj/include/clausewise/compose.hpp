#pragma once

#include <string>
#include <vector>

#include "clausewise/ast.hpp"
#include "clausewise/decompose.hpp"
#include "clausewise/schema.hpp"

namespace clausewise {

struct ComposeOptions {
  /// Give JOINs that lack an ON condition one taken from a foreign-key path.
  bool fill_missing_on = false;
};

/// Collapses clauses of one core that share a kind: SELECT items are merged
/// without duplicates, WHERE and HAVING conditions are AND-ed in order, the
/// first FROM, GROUP BY and ORDER BY are kept (a LIMIT-only clause lends its
/// limit to the kept ORDER BY). Output is in execution order.
std::vector<Clause> merge_same_level(const std::vector<Clause>& clauses);

/// Tables referenced by columns of the clauses, outside nested queries, in first-use order.
std::vector<std::string> referenced_tables(const std::vector<Clause>& clauses);

/// Shortest foreign-key path (undirected, ties broken by declaration order)
/// from any of `sources` to `target`, as the joins to append. Empty when the
/// target is already a source. Throws ComposeError(Unjoinable).
std::vector<JoinSpec> join_path(const std::vector<std::string>& sources, const std::string& target,
                                const SchemaCatalog& schema);

/// Appends the tables in `required` that the FROM chain lacks, each through
/// its shortest foreign-key path. With `fill_missing_on`, ON-less joins get the
/// condition of a direct foreign key (or are routed through intermediate tables).
std::vector<JoinSpec> rewrite_from_join(std::vector<JoinSpec> joins, const std::vector<std::string>& required,
                                        const SchemaCatalog& schema, bool fill_missing_on = false);

/// Reassembles a clause tree into a query: merges each core, repairs its
/// joins, substitutes subquery slots with the composed blocks. Throws ComposeError.
SqlAst compose(const ClauseTree& tree, const SchemaCatalog& schema, const ComposeOptions& options = {});

}  // namespace clausewise
