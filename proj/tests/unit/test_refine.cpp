#include <gtest/gtest.h>

#include "clausewise/errors.hpp"
#include "clausewise/evaluator.hpp"
#include "clausewise/refine.hpp"
#include "clausewise/sql.hpp"
#include "fixtures.hpp"
#include "support/random_query.hpp"

using namespace clausewise;

namespace {

const SchemaCatalog& concert() { return fixtures::schema("concert_singer"); }

struct Shown {
  Explanation explanation;
  StepDocument document;
};

Shown show(const std::string& sql, const SchemaCatalog& s = concert()) {
  auto explanation = explain_query(decompose(parse_sql(sql, s)), s);
  auto document = StepDocument::from(explanation);
  return {std::move(explanation), std::move(document)};
}

RefineResult run(const Shown& shown, const SchemaCatalog& s = concert()) {
  RuleBasedGenerator gen;
  return refine(shown.explanation, shown.document, s, gen);
}

bool same(const RefineResult& r, const std::string& sql, const SchemaCatalog& s = concert()) {
  return exact_set_match(r.query, parse_sql(sql, s));
}

class FailingGenerator final : public ClauseGenerator {
 public:
  Clause generate(std::string_view, const GenerationContext&) override {
    throw GenerationError(GenerationError::Kind::BackendFailure, "down");
  }
  std::string name() const override { return "failing"; }
};

StepError step_error(const Shown& shown, ClauseGenerator* gen = nullptr) {
  RuleBasedGenerator fallback;
  try {
    refine(shown.explanation, shown.document, concert(), gen ? *gen : fallback);
  } catch (const StepError& e) {
    return e;
  }
  ADD_FAILURE() << "expected StepError";
  return StepError(0, "", "");
}

}  // namespace

TEST(Headers, ParseOrdinals) {
  EXPECT_EQ(parse_header("Start the first query:"), 1u);
  EXPECT_EQ(parse_header("Start the third query"), 3u);
  EXPECT_EQ(parse_header("Return the name"), std::nullopt);
  EXPECT_EQ(parse_combine("Return the union of them"), SetOp::Union);
  EXPECT_EQ(parse_combine("Return the intersection of them"), SetOp::Intersect);
  EXPECT_EQ(parse_combine("Return the records in the first query but not in the second query"), SetOp::Except);
  EXPECT_EQ(parse_combine("Return the name"), std::nullopt);
}

TEST(Document, EditInsertErase) {
  auto shown = show("SELECT name FROM singer WHERE age > 30");
  auto& doc = shown.document;
  ASSERT_EQ(doc.entries.size(), 3u);
  EXPECT_EQ(doc.entries[1].origin, 1u);
  doc.insert(1, "new");
  EXPECT_EQ(doc.entries[1], (StepEntry{"new", std::nullopt}));
  doc.edit(2, "changed");
  EXPECT_EQ(doc.entries[2], (StepEntry{"changed", 1}));
  doc.erase(0);
  EXPECT_EQ(doc.entries.size(), 3u);
  EXPECT_THROW(doc.erase(7), std::out_of_range);
}

TEST(Refine, UnchangedDocumentIsIdentity) {
  for (const char* db : {"concert_singer", "college", "flight_network"}) {
    const auto& s = fixtures::schema(db);
    fixtures::RandomQueries gen(s, 3);
    for (int i = 0; i < 100; ++i) {
      const auto q = gen.query(2);
      auto explanation = explain_query(decompose(q), s);
      RuleBasedGenerator rb;
      const auto r = refine(explanation, StepDocument::from(explanation), s, rb);
      ASSERT_TRUE(exact_set_match(r.query, q)) << render_sql(q);
      for (const auto& o : r.outcomes) EXPECT_EQ(o.path, StepPath::Unchanged);
    }
  }
}

TEST(Refine, AtomicEditTakesDirectPath) {
  auto shown = show("SELECT name FROM singer WHERE age > 30");
  shown.document.edit(1, "Keep the records where the age is greater than 45");
  const auto r = run(shown);
  EXPECT_TRUE(same(r, "SELECT name FROM singer WHERE age > 45"));
  EXPECT_EQ(r.outcomes[1].path, StepPath::Direct);
  EXPECT_EQ(r.outcomes[1].edit, EditClassification::Kind::Atomic);
  EXPECT_EQ(r.outcomes[1].clause_sql, "WHERE age > 45");
}

TEST(Refine, ComplexEditIsGenerated) {
  auto shown = show("SELECT name FROM singer WHERE age > 30");
  shown.document.edit(1, "Keep the records where the age is less than 30");
  const auto r = run(shown);
  EXPECT_TRUE(same(r, "SELECT name FROM singer WHERE age < 30"));
  EXPECT_EQ(r.outcomes[1].path, StepPath::Generated);
  EXPECT_EQ(r.outcomes[1].edit, EditClassification::Kind::Complex);
}

TEST(Refine, DeleteStep) {
  auto shown = show("SELECT name FROM singer WHERE age > 30");
  shown.document.erase(1);
  EXPECT_TRUE(same(run(shown), "SELECT name FROM singer"));
}

TEST(Refine, InsertStep) {
  auto shown = show("SELECT name FROM singer");
  shown.document.insert(2, "Sort the records based on the age in descending order and return the top 2 records");
  const auto r = run(shown);
  EXPECT_TRUE(same(r, "SELECT name FROM singer ORDER BY age DESC LIMIT 2"));
  EXPECT_EQ(r.outcomes[2].path, StepPath::Generated);
  EXPECT_FALSE(r.outcomes[2].edit);
}

TEST(Refine, FiltersOnOtherTablesRepairJoins) {
  auto shown = show("SELECT name FROM singer");
  shown.document.insert(1, "Keep the records where the capacity of stadium is greater than 500");
  const auto r = run(shown);
  EXPECT_TRUE(same(r,
                   "SELECT T1.name FROM singer AS T1 JOIN singer_in_concert AS T2 ON T1.singer_id = T2.singer_id "
                   "JOIN concert AS T3 ON T2.concert_id = T3.concert_id JOIN stadium AS T4 ON T3.stadium_id = T4.stadium_id "
                   "WHERE T4.capacity > 500"))
      << render_sql(r.query);
}

TEST(Refine, CompoundOperatorChange) {
  auto shown = show("SELECT name FROM singer UNION SELECT name FROM stadium");
  shown.document.edit(shown.document.entries.size() - 1, "Return the intersection of them");
  const auto r = run(shown);
  EXPECT_TRUE(same(r, "SELECT name FROM singer INTERSECT SELECT name FROM stadium"));
  EXPECT_EQ(r.outcomes.back().path, StepPath::Structural);
}

TEST(Refine, NestedBlockEdit) {
  auto shown = show("SELECT name FROM singer WHERE singer_id IN (SELECT singer_id FROM singer_in_concert)");
  shown.document.insert(2, "Keep the records where the concert id is 2");
  EXPECT_TRUE(same(run(shown),
                   "SELECT name FROM singer WHERE singer_id IN (SELECT singer_id FROM singer_in_concert WHERE concert_id = 2)"));
}

TEST(Refine, UnparseableStepNamesTheStep) {
  auto shown = show("SELECT name FROM singer WHERE age > 30");
  shown.document.edit(1, "Paint the fence");
  const auto e = step_error(shown);
  EXPECT_EQ(e.step(), 2u);
  EXPECT_EQ(e.stage(), "generation");
  EXPECT_FALSE(e.retryable());
}

TEST(Refine, BackendFailureIsRetryable) {
  auto shown = show("SELECT name FROM singer WHERE age > 30");
  shown.document.edit(1, "Keep the records where the age is less than 30");
  FailingGenerator failing;
  const auto e = step_error(shown, &failing);
  EXPECT_EQ(e.step(), 2u);
  EXPECT_TRUE(e.retryable());
}

TEST(Refine, DeletingTheOnlySelectFails) {
  auto shown = show("SELECT name FROM singer WHERE age > 30");
  shown.document.erase(2);
  const auto e = step_error(shown);
  EXPECT_EQ(e.stage(), "compose");
}

TEST(Refine, MissingHeaderIsStructural) {
  auto shown = show("SELECT name FROM singer UNION SELECT name FROM stadium");
  ASSERT_EQ(shown.document.entries[3].text, "Start the second query:");
  shown.document.erase(3);
  const auto e = step_error(shown);
  EXPECT_EQ(e.stage(), "structure");
}
