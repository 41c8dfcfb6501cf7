#pragma once

#include <string>
#include <string_view>

#include "clausewise/ast.hpp"
#include "clausewise/schema.hpp"

namespace clausewise {

/// Parses one SELECT statement (optionally combined with INTERSECT/UNION/EXCEPT).
///
/// Keywords are case-insensitive, identifiers are canonicalized to the schema's
/// spelling and table aliases are replaced by the table they stand for. Throws
/// SqlSyntaxError or ResolutionError.
SqlAst parse_sql(std::string_view sql, const SchemaCatalog& schema);

struct RenderOptions {
  /// Wrap both operands of INTERSECT/UNION/EXCEPT in parentheses. Off produces
  /// text SQLite accepts.
  bool parenthesize_compounds = true;
};

/// Canonical SQL text: upper-case keywords, clauses in syntactic order, columns
/// qualified only when a core reads more than one table.
std::string render_sql(const SqlAst& ast, const RenderOptions& options = {});

/// Fragment renderers; `core` decides whether columns need a table qualifier.
std::string render_value(const ValueExpr& v, const SelectCore& core);
std::string render_literal(const Literal& l);
std::string render_condition(const Condition& c, const SelectCore& core, const RenderOptions& options = {});

}  // namespace clausewise
