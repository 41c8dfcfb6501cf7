#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clausewise/decompose.hpp"
#include "clausewise/explain.hpp"
#include "clausewise/schema.hpp"

namespace clausewise {

enum class ChunkClass { Column, Table, Literal, Other };

std::string_view to_string(ChunkClass c);

struct Chunk {
  std::string text;
  ChunkClass cls = ChunkClass::Other;
  std::size_t start = 0;
  std::size_t end = 0;
  /// Entity the chunk names: Column -> {table, column}; Table -> {table, ""}.
  std::optional<ColumnRef> binding;
  std::optional<Literal> literal;
  /// Entity site in the originating clause, when the chunk came from an explanation span.
  std::optional<std::size_t> site;
  /// Column written as "{col} of {T}".
  bool qualified = false;

  bool is_entity() const { return cls != ChunkClass::Other; }
  friend bool operator==(const Chunk&, const Chunk&) = default;
};

using ChunkSequence = std::vector<Chunk>;

struct ChunkOptions {
  /// Spans of the explanation the text came from; chunks covering a span
  /// exactly inherit its binding and site.
  const std::vector<Span>* spans = nullptr;
  /// Tables tried first when a column phrase exists in several tables.
  std::vector<std::string> preferred_tables;
};

/// Splits step text into chunks: quoted strings and numbers become literals,
/// the longest schema phrase (readable name or identifier) becomes one
/// column/table chunk, operator phrases stay whole, everything else is a word
/// or punctuation chunk.
ChunkSequence chunk(std::string_view text, const SchemaCatalog& schema, const ChunkOptions& options = {});

/// Operator phrases kept as single chunks, longest first.
const std::vector<std::string>& operator_phrases();

/// Alignment scoring: match +2, same-class entity mismatch +1, other mismatch -1, gap -1.
inline constexpr int kGapScore = -1;
int chunk_score(const Chunk& a, const Chunk& b);
/// True when two chunks count as the same text (case, edge articles and the
/// connectives "," / "and" are ignored).
bool chunks_match(const Chunk& a, const Chunk& b);

struct AlignedPair {
  std::optional<Chunk> original;
  std::optional<Chunk> edited;
};

/// Which move the traceback takes when several give the optimal score.
enum class TieBreak { Substitution, Deletion };

/// Needleman-Wunsch global alignment. By default ties prefer substitution,
/// then a gap in the edited sequence; Deletion tries the gap first.
std::vector<AlignedPair> align(const ChunkSequence& original, const ChunkSequence& edited,
                               TieBreak ties = TieBreak::Substitution);
int alignment_score(const std::vector<AlignedPair>& pairs);

struct AtomicEdit {
  enum class Kind { Replace, AddColumn, RemoveColumn };
  Kind kind = Kind::Replace;
  std::optional<Chunk> from;  // Replace, RemoveColumn
  std::optional<Chunk> to;    // Replace, AddColumn
};

struct EditClassification {
  enum class Kind { NoChange, Atomic, Complex };
  Kind kind = Kind::NoChange;
  std::vector<AtomicEdit> edits;
};

std::string_view to_string(EditClassification::Kind k);

EditClassification classify_edit(const std::vector<AlignedPair>& pairs);

struct EditRequest {
  ExplanationStep original;  // e_o with its spans
  std::string edited;        // e_n
  Clause clause;             // s
};

/// Applies atomic edits to the clause without regenerating it. Throws EditError
/// when an edit does not fit the clause.
Clause direct_transform(const EditRequest& request, const EditClassification& classification, const SchemaCatalog& schema);

/// Chunks both texts, aligns and classifies. When the default alignment gives
/// atomic edits that do not fit the clause, the deletion-first alignment is
/// used if its edits do.
EditClassification classify_texts(const EditRequest& request, const SchemaCatalog& schema,
                                  const std::vector<std::string>& preferred_tables = {});

}  // namespace clausewise
