#include <gtest/gtest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <thread>

#include "clausewise/clause_gen.hpp"
#include "clausewise/errors.hpp"
#include "clausewise/evaluator.hpp"
#include "clausewise/explain.hpp"
#include "clausewise/sql.hpp"
#include "fixtures.hpp"

using namespace clausewise;

namespace {

const SchemaCatalog& concert() { return fixtures::schema("concert_singer"); }

GenerationContext context(const SchemaCatalog& s, std::vector<std::string> scope, std::size_t blocks = 0) {
  GenerationContext ctx;
  ctx.schema = &s;
  ctx.scope = std::move(scope);
  ctx.block_count = blocks;
  return ctx;
}

std::string generate(const std::string& text, std::vector<std::string> scope = {"singer"}) {
  RuleBasedGenerator gen;
  return render_clause(generate_clause(text, context(concert(), scope), gen), scope);
}

GenerationError::Kind failure(const std::string& text, std::vector<std::string> scope = {"singer"}, std::size_t blocks = 0) {
  RuleBasedGenerator gen;
  try {
    generate_clause(text, context(concert(), scope, blocks), gen);
  } catch (const GenerationError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no GenerationError for: " << text;
  return GenerationError::Kind::BackendFailure;
}

/// Local HTTP endpoint standing in for a learned clause generator.
class FakeBackend {
 public:
  explicit FakeBackend(httplib::Server::Handler handler) {
    server_.Post("/generate", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeBackend() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/generate"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(InferType, CuePhrases) {
  EXPECT_EQ(infer_clause_type("In table singer"), ClauseKind::FromJoinOn);
  EXPECT_EQ(infer_clause_type("Keep the records where the age is 3"), ClauseKind::Where);
  EXPECT_EQ(infer_clause_type("Group the records based on the country"), ClauseKind::GroupBy);
  EXPECT_EQ(infer_clause_type("Return the name"), ClauseKind::Select);
  EXPECT_EQ(infer_clause_type("Find the name"), ClauseKind::Select);
  EXPECT_EQ(infer_clause_type("Sort the records based on the age in ascending order"), ClauseKind::OrderBy);
  EXPECT_THROW(infer_clause_type("Paint the fence"), GenerationError);
}

TEST(RuleBased, Examples) {
  EXPECT_EQ(generate("Return the name and the age"), "SELECT name, age");
  EXPECT_EQ(generate("Keep the records where the age is greater than 30"), "WHERE age > 30");
  EXPECT_EQ(generate("Keep the records where the age is less than 30"), "WHERE age < 30");
  EXPECT_EQ(generate("Group the records based on the country"), "GROUP BY country");
  EXPECT_EQ(generate("Sort the records based on the age in descending order"), "ORDER BY age DESC");
  EXPECT_EQ(generate("Return the number of records"), "SELECT COUNT(*)");
}

TEST(RuleBased, Errors) {
  EXPECT_EQ(failure("Paint the fence"), GenerationError::Kind::Unclassifiable);
  EXPECT_EQ(failure("Return the wingspan"), GenerationError::Kind::UnboundEntity);
  EXPECT_EQ(failure("Keep the records where the age is between"), GenerationError::Kind::Unparseable);
}

// Every clause step of the golden explanations, and paraphrases of it,
// generates the clause it was explained from.
TEST(RuleBased, InvertsGoldenExplanations) {
  RuleBasedGenerator gen;
  std::size_t checked = 0;
  for (const auto& item : load_corpus(fixtures::data_path("corpus/golden.jsonl"))) {
    const auto& s = fixtures::schema(item.db_id);
    const auto tree = decompose(parse_sql(item.gold_sql, s));
    const auto explanation = explain_query(tree, s);
    for (const auto& step : explanation.steps) {
      if (!step.kind) continue;
      const auto& core = subtree(tree, step.slot.path).core();
      const auto& original = core.clauses[step.slot.clause_index];
      auto ctx = context(s, core_scope(core), core.blocks.size());
      ctx.position = step.index;
      for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto text = seed ? paraphrase(step, seed).text : step.text;
        EXPECT_EQ(infer_clause_type(text), *step.kind) << text;
        const auto out = generate_clause(text, ctx, gen);
        EXPECT_TRUE(clauses_equivalent(out, original))
            << item.id << ": " << text << "\n" << render_clause(out, ctx.scope) << "\n" << render_clause(original, ctx.scope);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 600u);
}

TEST(Validate, RejectsUnknownEntitiesAndSlots) {
  const auto ctx = context(concert(), {"singer"});
  EXPECT_NO_THROW(validate_clause(parse_clause("WHERE age > 3", concert(), {"singer"}), ctx));
  Clause bad = parse_clause("SELECT name", concert(), {"singer"});
  bad.select_body().items[0].column.column = "wingspan";
  EXPECT_THROW(validate_clause(bad, ctx), GenerationError);
  Clause slot = parse_clause("WHERE singer_id IN (SELECT singer_id FROM singer_in_concert)", concert(), {"singer"});
  slot.filter().condition.predicate->rhs = SubquerySlot{0};
  EXPECT_THROW(validate_clause(slot, ctx), GenerationError);
  auto with_block = ctx;
  with_block.block_count = 1;
  EXPECT_NO_THROW(validate_clause(slot, with_block));
}

TEST(Remote, SendsRequestAndParsesReply) {
  nlohmann::json seen;
  FakeBackend backend([&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    res.set_content(R"({"clause_sql": "WHERE age > 41"})", "application/json");
  });
  RemoteGenerator gen(backend.url());
  auto ctx = context(concert(), {"singer"});
  ctx.siblings.push_back(parse_clause("SELECT name", concert(), {"singer"}));
  const auto out = generate_clause("Keep the records where the age is over 41", ctx, gen);
  EXPECT_EQ(render_clause(out, ctx.scope), "WHERE age > 41");
  EXPECT_EQ(seen["explanation"], "Keep the records where the age is over 41");
  EXPECT_EQ(seen["schema_id"], "concert_singer");
  EXPECT_EQ(seen["clause_kind_hint"], "WHERE");
  EXPECT_EQ(seen["sibling_sql"], nlohmann::json::array({"SELECT name"}));
}

TEST(Remote, BadOutputIsInvalid) {
  for (const char* body : {"not json", R"({"sql": "x"})", R"({"clause_sql": "WHERE wingspan > 3"})"}) {
    FakeBackend backend([&](const httplib::Request&, httplib::Response& res) { res.set_content(body, "application/json"); });
    RemoteGenerator gen(backend.url());
    try {
      generate_clause("Keep the records where the age is 3", context(concert(), {"singer"}), gen);
      ADD_FAILURE() << body;
    } catch (const GenerationError& e) {
      EXPECT_EQ(e.kind(), GenerationError::Kind::InvalidOutput) << body;
      EXPECT_FALSE(e.retryable());
    }
  }
}

TEST(Remote, ServerErrorIsRetryable) {
  FakeBackend backend([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  RemoteGenerator gen(backend.url());
  try {
    generate_clause("Return the name", context(concert(), {"singer"}), gen);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.kind(), GenerationError::Kind::BackendFailure);
    EXPECT_TRUE(e.retryable());
  }
}

TEST(Remote, UnreachableIsRetryable) {
  std::string url;
  { FakeBackend gone([](const httplib::Request&, httplib::Response&) {}); url = gone.url(); }
  RemoteGenerator gen(url, std::chrono::milliseconds(300));
  try {
    generate_clause("Return the name", context(concert(), {"singer"}), gen);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_TRUE(e.retryable());
  }
}
