#pragma once

#include <cstdint>
#include <vector>

#include "clausewise/decompose.hpp"

namespace clausewise {

/// An editable entity position inside a clause: a column reference, a FROM
/// table, a literal or the LIMIT count. Explanation spans and direct
/// transformation address entities by their ordinal in this list.
struct SiteRef {
  enum class Kind { Column, Table, Literal, Limit };
  Kind kind = Kind::Column;
  ColumnRef* column = nullptr;
  std::string* table = nullptr;
  Literal* literal = nullptr;
  std::int64_t* limit = nullptr;
  /// Set for entities of a scalar subquery kept inside its condition.
  bool in_subquery = false;
};

/// Sites in explanation order. Pointers stay valid until the clause is modified
/// structurally.
std::vector<SiteRef> clause_sites(Clause& clause);

}  // namespace clausewise
