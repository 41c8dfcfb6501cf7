#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clausewise/clause_gen.hpp"
#include "clausewise/evaluator.hpp"
#include "clausewise/explain.hpp"
#include "clausewise/refine.hpp"
#include "clausewise/schema.hpp"

namespace clausewise {

/// One change a user makes to the step document. Positions refer to the
/// document as it stands when the operation is applied.
struct FeedbackOp {
  enum class Kind { Edit, Insert, Delete };
  Kind kind = Kind::Edit;
  std::size_t position = 0;
  std::string text;  // Edit, Insert

  friend bool operator==(const FeedbackOp&, const FeedbackOp&) = default;
};

std::string_view to_string(FeedbackOp::Kind k);
nlohmann::ordered_json to_json(const FeedbackOp& op);

struct SimulatorOptions {
  /// Reword the written steps with synonyms.
  bool paraphrase = false;
  std::uint64_t seed = 0;
  double probability = 0.5;
};

/// Feedback a user who knows the gold query would give on the shown
/// explanation: wrong steps are rewritten with the gold clause's
/// explanation, extra steps deleted, missing steps inserted where they run.
/// Subtrees whose shape differs are replaced as a whole.
std::vector<FeedbackOp> simulate_feedback(const Explanation& shown, const SqlAst& gold, const SchemaCatalog& schema,
                                          const SimulatorOptions& options = {});

void apply_feedback(StepDocument& document, const std::vector<FeedbackOp>& ops);

/// A wrong prediction made from the gold query by dropping, altering or adding clauses.
struct Corruption {
  SqlAst query;
  std::vector<std::string> operations;
};

/// Applies between `min_ops` and `max_ops` random clause corruptions; the
/// result always differs from `gold` under exact set match.
Corruption corrupt_query(const SqlAst& gold, const SchemaCatalog& schema, std::uint64_t seed, int min_ops = 1,
                         int max_ops = 3);

/// First-guess SQL for a question.
class TextToSqlBackend {
 public:
  virtual ~TextToSqlBackend() = default;
  virtual std::string predict(const std::string& question, const SchemaCatalog& schema) = 0;
  virtual std::string name() const = 0;
};

/// Treats the question itself as the SQL answer.
class LiteralSqlBackend final : public TextToSqlBackend {
 public:
  std::string predict(const std::string& question, const SchemaCatalog& schema) override;
  std::string name() const override { return "literal"; }
};

/// Posts {question, schema_id} to a URL and expects {sql} back.
class RemoteTextToSql final : public TextToSqlBackend {
 public:
  explicit RemoteTextToSql(std::string url, std::chrono::milliseconds timeout = std::chrono::seconds(30));
  std::string predict(const std::string& question, const SchemaCatalog& schema) override;
  std::string name() const override { return "remote"; }

 private:
  std::string url_;
  std::chrono::milliseconds timeout_;
};

struct LoopOptions {
  int max_rounds = 3;
  bool paraphrase = false;
  std::uint64_t seed = 0;
  double probability = 0.5;
};

struct RoundRecord {
  int round = 0;
  std::string shown_sql;
  std::vector<std::string> shown_steps;
  std::vector<FeedbackOp> feedback;
  std::vector<StepOutcome> outcomes;
  /// Steps that could not be resolved this round, in the order they failed.
  std::vector<std::string> errors;
  std::string result_sql;
  ComponentVerdicts verdicts;
};

struct LoopResult {
  bool initially_correct = false;
  bool solved = false;
  int rounds_used = 0;
  /// The document as a whole could not be refined; the loop stopped.
  bool error = false;
  std::string final_sql;
  std::vector<RoundRecord> rounds;
};

/// Shows the explanation of `initial`, collects simulated feedback against
/// `gold`, refines, and repeats until the prediction matches or the rounds run out.
LoopResult run_refinement_loop(const SqlAst& initial, const SqlAst& gold, const SchemaCatalog& schema,
                               ClauseGenerator& generator, const LoopOptions& options = {});

nlohmann::ordered_json to_json(const LoopResult& result);

/// First prediction for corpus item `index`.
using Predictor = std::function<std::string(const CorpusItem& item, std::size_t index, const SchemaCatalog& schema)>;

/// The gold query with 1 to 3 random clause corruptions, seeded per item.
Predictor corrupting_predictor(std::uint64_t seed);

struct CorpusRunOptions {
  LoopOptions loop;
  /// 0: one worker per hardware thread.
  unsigned threads = 0;
  /// SQLite file, or a directory of {db_id}.sqlite files, for execution
  /// accuracy. Empty: not measured.
  std::filesystem::path database;
};

struct CorpusRun {
  std::vector<EvaluationRecord> records;
  std::vector<LoopResult> loops;  // parallel to records
};

/// Predicts, refines and scores every item, spreading items over worker threads.
/// Results are in corpus order and independent of the thread count.
CorpusRun run_corpus(const std::vector<CorpusItem>& items, const std::function<const SchemaCatalog&(const std::string&)>& schema_for,
                     const Predictor& predict, const std::function<std::unique_ptr<ClauseGenerator>()>& make_generator,
                     const CorpusRunOptions& options = {});

}  // namespace clausewise
