#include <gtest/gtest.h>

#include "clausewise/errors.hpp"
#include "clausewise/evaluator.hpp"
#include "clausewise/simulate.hpp"
#include "clausewise/sql.hpp"
#include "fixtures.hpp"

using namespace clausewise;

namespace {

const SchemaCatalog& concert() { return fixtures::schema("concert_singer"); }

SqlAst q(const std::string& sql) { return parse_sql(sql, concert()); }

Explanation shown(const SqlAst& query) { return explain_query(decompose(query), concert()); }

std::vector<CorpusItem> golden() { return load_corpus(fixtures::data_path("corpus/golden.jsonl")); }

/// Generator that refuses one exact step text and defers to the rule-based one otherwise.
class RefusingGenerator final : public ClauseGenerator {
 public:
  explicit RefusingGenerator(std::string refused) : refused_(std::move(refused)) {}
  Clause generate(std::string_view text, const GenerationContext& ctx) override {
    if (text == refused_) throw GenerationError(GenerationError::Kind::Unparseable, "refused");
    return inner_.generate(text, ctx);
  }
  std::string name() const override { return "refusing"; }

 private:
  std::string refused_;
  RuleBasedGenerator inner_;
};

}  // namespace

TEST(Feedback, OpNames) {
  EXPECT_EQ(to_string(FeedbackOp::Kind::Edit), "REPLACE_STEP");
  EXPECT_EQ(to_string(FeedbackOp::Kind::Insert), "INSERT_STEP");
  EXPECT_EQ(to_string(FeedbackOp::Kind::Delete), "DELETE_STEP");
}

TEST(Feedback, CorrectPredictionNeedsNone) {
  const auto gold = q("SELECT name FROM singer WHERE age > 30");
  EXPECT_TRUE(simulate_feedback(shown(gold), gold, concert()).empty());
}

TEST(Feedback, WrongStepIsRewritten) {
  const auto gold = q("SELECT name FROM singer WHERE age > 30");
  const auto ops = simulate_feedback(shown(q("SELECT name FROM singer WHERE age > 20")), gold, concert());
  ASSERT_EQ(ops.size(), 1u);
  EXPECT_EQ(ops[0], (FeedbackOp{FeedbackOp::Kind::Edit, 1, "Keep the records where the age is greater than 30"}));
}

TEST(Feedback, ExtraAndMissingSteps) {
  const auto gold = q("SELECT name FROM singer ORDER BY age");
  const auto ops = simulate_feedback(shown(q("SELECT name FROM singer WHERE age > 20")), gold, concert());
  ASSERT_EQ(ops.size(), 2u);
  EXPECT_EQ(ops[0].kind, FeedbackOp::Kind::Delete);
  EXPECT_EQ(ops[1].kind, FeedbackOp::Kind::Insert);
}

// Applying the feedback to the shown document and refining gives the gold query.
TEST(Feedback, IsSoundOnGolden) {
  for (const auto& item : golden()) {
    const auto& s = fixtures::schema(item.db_id);
    const auto gold = parse_sql(item.gold_sql, s);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto wrong = corrupt_query(gold, s, seed).query;
      const auto explanation = explain_query(decompose(wrong), s);
      auto doc = StepDocument::from(explanation);
      apply_feedback(doc, simulate_feedback(explanation, gold, s));
      RuleBasedGenerator gen;
      const auto r = refine(explanation, doc, s, gen);
      EXPECT_TRUE(exact_set_match(r.query, gold)) << item.id << " seed " << seed << "\n" << render_sql(r.query);
    }
  }
}

TEST(Corrupt, AlwaysDiffersAndIsDeterministic) {
  for (const auto& item : golden()) {
    const auto& s = fixtures::schema(item.db_id);
    const auto gold = parse_sql(item.gold_sql, s);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto c = corrupt_query(gold, s, seed);
      EXPECT_FALSE(exact_set_match(c.query, gold)) << item.id;
      EXPECT_FALSE(c.operations.empty());
      EXPECT_LE(c.operations.size(), 3u);
      EXPECT_EQ(render_sql(corrupt_query(gold, s, seed).query), render_sql(c.query));
    }
  }
}

TEST(Loop, InitiallyCorrectUsesNoRounds) {
  RuleBasedGenerator gen;
  const auto gold = q("SELECT name FROM singer");
  const auto r = run_refinement_loop(gold, gold, concert(), gen);
  EXPECT_TRUE(r.initially_correct);
  EXPECT_TRUE(r.solved);
  EXPECT_EQ(r.rounds_used, 0);
}

// Solved queries stay solved: the verdict sequence never goes from exact to not.
TEST(Loop, SolvesGoldenAndIsMonotone) {
  RuleBasedGenerator gen;
  for (const auto& item : golden()) {
    const auto& s = fixtures::schema(item.db_id);
    const auto gold = parse_sql(item.gold_sql, s);
    const auto r = run_refinement_loop(corrupt_query(gold, s, 9).query, gold, s, gen);
    EXPECT_TRUE(r.solved) << item.id;
    EXPECT_LE(r.rounds_used, 3);
    bool seen_exact = false;
    for (const auto& round : r.rounds) {
      if (seen_exact) EXPECT_TRUE(round.verdicts.exact()) << item.id;
      seen_exact = seen_exact || round.verdicts.exact();
    }
  }
}

TEST(Loop, UnresolvableStepIsReportedAndLoopContinues) {
  const auto gold = q("SELECT name FROM singer WHERE age > 30 ORDER BY age");
  const auto wrong = q("SELECT name FROM singer WHERE age > 20");
  RefusingGenerator gen("Sort the records based on the age");
  const auto r = run_refinement_loop(wrong, gold, concert(), gen, LoopOptions{2});
  EXPECT_FALSE(r.solved);
  EXPECT_FALSE(r.error);
  ASSERT_EQ(r.rounds.size(), 2u);
  ASSERT_FALSE(r.rounds[0].errors.empty());
  EXPECT_NE(r.rounds[0].errors[0].find("step"), std::string::npos);
  // The WHERE fix still went through.
  EXPECT_TRUE(r.rounds[0].verdicts.where);
}

TEST(Loop, JsonHasRounds) {
  RuleBasedGenerator gen;
  const auto r = run_refinement_loop(q("SELECT age FROM singer"), q("SELECT name FROM singer"), concert(), gen);
  const auto j = to_json(r);
  EXPECT_EQ(j["solved"], true);
  EXPECT_EQ(j["rounds"].size(), 1u);
  EXPECT_EQ(j["rounds"][0]["feedback"][0]["op"], "REPLACE_STEP");
}

TEST(Loop, ParaphrasedFeedbackMostlySolves) {
  RuleBasedGenerator gen;
  std::size_t solved = 0, total = 0;
  for (const auto& item : golden()) {
    const auto& s = fixtures::schema(item.db_id);
    const auto gold = parse_sql(item.gold_sql, s);
    LoopOptions options;
    options.paraphrase = true;
    options.seed = 4;
    solved += run_refinement_loop(corrupt_query(gold, s, 4).query, gold, s, gen, options).solved;
    ++total;
  }
  EXPECT_GE(solved * 100, total * 95);
}

TEST(Corpus, ThreadCountDoesNotChangeResults) {
  const auto items = golden();
  auto run = [&](unsigned threads) {
    CorpusRunOptions options;
    options.threads = threads;
    options.loop.paraphrase = true;
    options.loop.seed = 2;
    return run_corpus(
        items, [](const std::string& id) -> const SchemaCatalog& { return fixtures::schema(id); }, corrupting_predictor(2),
        [] { return std::make_unique<RuleBasedGenerator>(); }, options);
  };
  const auto one = run(1);
  const auto four = run(4);
  ASSERT_EQ(one.loops.size(), items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    EXPECT_EQ(to_json(one.loops[i]), to_json(four.loops[i])) << items[i].id;
    EXPECT_EQ(one.records[i].id, items[i].id);
  }
  const auto report = accuracy_report(one.records);
  EXPECT_EQ(report.total, items.size());
  EXPECT_EQ(report.exact_before, 0u);
}
