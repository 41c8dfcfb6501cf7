#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "clausewise/editor.hpp"
#include "clausewise/errors.hpp"
#include "clausewise/evaluator.hpp"
#include "clausewise/explain.hpp"
#include "clausewise/sql.hpp"
#include "fixtures.hpp"
#include "support/atomic_edits.hpp"

using namespace clausewise;

namespace {

const SchemaCatalog& concert() { return fixtures::schema("concert_singer"); }

std::vector<std::string> texts(const ChunkSequence& chunks) {
  std::vector<std::string> out;
  for (const auto& c : chunks) out.push_back(c.text);
  return out;
}

/// Best score over every alignment, enumerated without memoization.
int brute_force(const ChunkSequence& a, const ChunkSequence& b, std::size_t i = 0, std::size_t j = 0) {
  if (i == a.size()) return kGapScore * static_cast<int>(b.size() - j);
  if (j == b.size()) return kGapScore * static_cast<int>(a.size() - i);
  return std::max({chunk_score(a[i], b[j]) + brute_force(a, b, i + 1, j + 1), kGapScore + brute_force(a, b, i + 1, j),
                   kGapScore + brute_force(a, b, i, j + 1)});
}

Chunk random_chunk(std::mt19937_64& rng) {
  static const std::vector<std::string> words{"the", "of", "and", "records", "name", "age", "30", "singer"};
  Chunk c;
  c.text = words[rng() % words.size()];
  c.cls = static_cast<ChunkClass>(rng() % 4);
  if (c.cls == ChunkClass::Column) c.binding = ColumnRef{"singer", c.text};
  if (c.cls == ChunkClass::Table) c.binding = ColumnRef{c.text, ""};
  return c;
}

struct Prepared {
  SqlAst query;
  ClauseTree tree;
  Explanation explanation;
};

Prepared prepare(const std::string& sql, const SchemaCatalog& s = concert()) {
  Prepared p{parse_sql(sql, s), {}, {}};
  p.tree = decompose(p.query);
  p.explanation = explain_query(p.tree, s);
  return p;
}

/// The request for editing explanation step `index` of `p` to `edited`.
EditRequest request(const Prepared& p, std::size_t index, std::string edited) {
  const auto& step = p.explanation.steps[index];
  const auto& core = subtree(p.tree, step.slot.path).core();
  return EditRequest{step, std::move(edited), core.clauses[step.slot.clause_index]};
}

std::string render(const Clause& clause, const Prepared& p, std::size_t index) {
  const auto& core = subtree(p.tree, p.explanation.steps[index].slot.path).core();
  return render_clause(clause, core_scope(core));
}

}  // namespace

TEST(Chunk, LiteralsColumnsAndOperators) {
  const auto chunks = chunk("Keep the records where the age is greater than 30", concert());
  EXPECT_EQ(texts(chunks), (std::vector<std::string>{"Keep", "the", "records", "where", "the", "age", "is greater than", "30"}));
  EXPECT_EQ(chunks[5].cls, ChunkClass::Column);
  EXPECT_EQ(chunks[5].binding, (ColumnRef{"singer", "age"}));
  EXPECT_EQ(chunks[6].cls, ChunkClass::Other);
  EXPECT_EQ(chunks[7].cls, ChunkClass::Literal);
  EXPECT_EQ(chunks[7].literal, Literal::number("30"));
}

TEST(Chunk, OffsetsCoverTheText) {
  const std::string text = "Return the song name and the country";
  for (const auto& c : chunk(text, concert())) EXPECT_EQ(text.substr(c.start, c.end - c.start), c.text);
}

TEST(Chunk, ReadableNameIsOneChunk) {
  const auto chunks = chunk("Return the song name", concert());
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[2].binding, (ColumnRef{"singer", "song_name"}));
}

TEST(Chunk, QuotedStringIsLiteral) {
  const auto chunks = chunk("the country is \"New Zealand\"", concert());
  ASSERT_EQ(chunks.back().cls, ChunkClass::Literal);
  EXPECT_EQ(chunks.back().literal, Literal::string("New Zealand"));
}

TEST(Chunk, ColumnOfTableMerges) {
  const auto chunks = chunk("the name of stadium", concert());
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[1].text, "name of stadium");
  EXPECT_TRUE(chunks[1].qualified);
  EXPECT_EQ(chunks[1].binding, (ColumnRef{"stadium", "name"}));
}

TEST(Chunk, ColumnOfForeignTableDoesNotMerge) {
  const auto chunks = chunk("the capacity of singer", concert());
  EXPECT_EQ(texts(chunks), (std::vector<std::string>{"the", "capacity", "of", "singer"}));
  EXPECT_EQ(chunks[3].cls, ChunkClass::Table);
}

TEST(Chunk, PreferredTablesDisambiguate) {
  ChunkOptions options;
  options.preferred_tables = {"stadium"};
  const auto chunks = chunk("the name", concert(), options);
  EXPECT_EQ(chunks[1].binding, (ColumnRef{"stadium", "name"}));
}

TEST(Score, Values) {
  auto a = chunk("the age", concert());
  auto b = chunk("the name", concert());
  EXPECT_EQ(chunk_score(a[0], b[0]), 2);
  EXPECT_EQ(chunk_score(a[1], b[1]), 1);
  EXPECT_EQ(chunk_score(a[0], b[1]), -1);
}

TEST(Score, ConnectivesAndCaseMatch) {
  const auto a = chunk("The , x", concert());
  const auto b = chunk("the and x", concert());
  EXPECT_TRUE(chunks_match(a[0], b[0]));
  EXPECT_TRUE(chunks_match(a[1], b[1]));
}

TEST(Align, ScoreEqualsBruteForce) {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 1000; ++n) {
    ChunkSequence a(rng() % 9), b(rng() % 9);
    for (auto& c : a) c = random_chunk(rng);
    for (auto& c : b) c = random_chunk(rng);
    const int expected = brute_force(a, b);
    for (auto ties : {TieBreak::Substitution, TieBreak::Deletion}) {
      const auto pairs = align(a, b, ties);
      ASSERT_EQ(alignment_score(pairs), expected);
      ChunkSequence left, right;
      for (const auto& p : pairs) {
        ASSERT_TRUE(p.original || p.edited);
        if (p.original) left.push_back(*p.original);
        if (p.edited) right.push_back(*p.edited);
      }
      EXPECT_EQ(left, a);
      EXPECT_EQ(right, b);
    }
  }
}

TEST(Align, EmptySequences) {
  EXPECT_TRUE(align({}, {}).empty());
  const auto b = chunk("the age", concert());
  EXPECT_EQ(alignment_score(align({}, b)), -2);
}

TEST(Classify, NoChange) {
  const auto a = chunk("Return the name", concert());
  EXPECT_EQ(classify_edit(align(a, a)).kind, EditClassification::Kind::NoChange);
}

TEST(Classify, ColumnSwapIsAtomic) {
  const auto c = classify_edit(align(chunk("Return the name", concert()), chunk("Return the age", concert())));
  ASSERT_EQ(c.kind, EditClassification::Kind::Atomic);
  ASSERT_EQ(c.edits.size(), 1u);
  EXPECT_EQ(c.edits[0].kind, AtomicEdit::Kind::Replace);
  EXPECT_EQ(c.edits[0].to->binding, (ColumnRef{"singer", "age"}));
}

TEST(Classify, AddedColumnIsAtomic) {
  const auto c = classify_edit(align(chunk("Return the name", concert()), chunk("Return the name and the age", concert())));
  ASSERT_EQ(c.kind, EditClassification::Kind::Atomic);
  EXPECT_EQ(c.edits[0].kind, AtomicEdit::Kind::AddColumn);
}

TEST(Classify, OperatorChangeIsComplex) {
  const auto c = classify_edit(align(chunk("where the age is greater than 30", concert()),
                                     chunk("where the age is less than 30", concert())));
  EXPECT_EQ(c.kind, EditClassification::Kind::Complex);
}

TEST(DirectTransform, LiteralChange) {
  const auto p = prepare("SELECT name FROM singer WHERE age > 30");
  const auto r = request(p, 1, "Keep the records where the age is greater than 40");
  const auto out = direct_transform(r, classify_texts(r, concert()), concert());
  EXPECT_EQ(render(out, p, 1), "WHERE age > 40");
}

TEST(DirectTransform, ColumnChange) {
  const auto p = prepare("SELECT name FROM singer WHERE age > 30");
  const auto r = request(p, 2, "Return the country");
  const auto out = direct_transform(r, classify_texts(r, concert()), concert());
  EXPECT_EQ(render(out, p, 2), "SELECT country");
}

TEST(DirectTransform, AddAndRemoveSelectItems) {
  const auto p = prepare("SELECT name, age FROM singer");
  auto r = request(p, 1, "Return the name, the age and the country");
  EXPECT_EQ(render(direct_transform(r, classify_texts(r, concert()), concert()), p, 1), "SELECT name, age, country");
  r = request(p, 1, "Return the age");
  EXPECT_EQ(render(direct_transform(r, classify_texts(r, concert()), concert()), p, 1), "SELECT age");
}

TEST(DirectTransform, QualifiedColumnMovesTable) {
  const auto p = prepare(
      "SELECT T1.name FROM concert AS T2 JOIN stadium AS T1 ON T2.stadium_id = T1.stadium_id WHERE T2.year > 2014");
  const auto it = std::find_if(p.explanation.steps.begin(), p.explanation.steps.end(),
                               [](const ExplanationStep& s) { return s.kind == ClauseKind::Select; });
  ASSERT_NE(it, p.explanation.steps.end());
  const std::size_t index = static_cast<std::size_t>(it - p.explanation.steps.begin());
  const auto r = request(p, index, "Return the concert name of concert");
  const auto c = classify_texts(r, concert());
  ASSERT_EQ(c.kind, EditClassification::Kind::Atomic);
  const auto out = direct_transform(r, c, concert());
  EXPECT_EQ(out.select_body().items[0].column, (ColumnRef{"concert", "concert_name"}));
}

TEST(DirectTransform, RemovingEveryColumnFails) {
  const auto p = prepare("SELECT name, age FROM singer");
  const auto r = request(p, 1, "Return");
  ChunkOptions options;
  options.spans = &r.original.spans;
  EditClassification c{EditClassification::Kind::Atomic, {}};
  for (const auto& ch : chunk(r.original.text, concert(), options))
    if (ch.cls == ChunkClass::Column) c.edits.push_back(AtomicEdit{AtomicEdit::Kind::RemoveColumn, ch, std::nullopt});
  ASSERT_EQ(c.edits.size(), 2u);
  try {
    direct_transform(r, c, concert());
    FAIL() << "expected EditError";
  } catch (const EditError& e) {
    EXPECT_EQ(e.kind(), EditError::Kind::EmptySelect);
  }
}

TEST(DirectTransform, AddColumnOutsideSelectFails) {
  const auto p = prepare("SELECT name FROM singer WHERE age > 30");
  const auto r = request(p, 1, "Keep the records where the age is greater than 30 the country");
  AtomicEdit add{AtomicEdit::Kind::AddColumn, std::nullopt, chunk("country", concert())[0]};
  try {
    direct_transform(r, EditClassification{EditClassification::Kind::Atomic, {add}}, concert());
    FAIL() << "expected EditError";
  } catch (const EditError& e) {
    EXPECT_EQ(e.kind(), EditError::Kind::NotSelectClause);
  }
}

TEST(DirectTransform, MissingTargetFails) {
  const auto p = prepare("SELECT name FROM singer WHERE age > 30");
  const auto r = request(p, 1, "Keep the records where the age is greater than 40");
  AtomicEdit swap{AtomicEdit::Kind::Replace, chunk("77", concert())[0], chunk("40", concert())[0]};
  try {
    direct_transform(r, EditClassification{EditClassification::Kind::Atomic, {swap}}, concert());
    FAIL() << "expected EditError";
  } catch (const EditError& e) {
    EXPECT_EQ(e.kind(), EditError::Kind::TargetNotFound);
  }
}

// Direct transform of the explanation of an AST edit gives back that AST edit.
TEST(DirectTransform, AgreesWithAstEdits) {
  for (const char* db : {"concert_singer", "college", "flight_network"}) {
    const auto& s = fixtures::schema(db);
    fixtures::AtomicEdits edits(s, 17);
    for (int i = 0; i < 200; ++i) {
      const auto c = edits.next();
      const EditRequest r{c.step, c.edited_text, c.clause};
      const auto classification = classify_texts(r, s, c.scope);
      ASSERT_EQ(classification.kind, EditClassification::Kind::Atomic) << c.description << ": " << c.edited_text;
      const auto out = direct_transform(r, classification, s);
      EXPECT_TRUE(clauses_equivalent(out, c.expected))
          << c.description << "\n" << render_clause(out, c.scope) << "\n" << render_clause(c.expected, c.scope);
    }
  }
}
