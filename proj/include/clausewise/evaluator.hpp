#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clausewise/ast.hpp"
#include "clausewise/decompose.hpp"

namespace clausewise {

/// Per-component agreement between a predicted and a gold query. SELECT and
/// GROUP BY compare as sets, WHERE/HAVING as multisets of top-level AND
/// conjuncts, FROM as a table set plus a set of ON conjuncts (a = b matches
/// b = a), ORDER BY as an ordered key list with direction and limit (no
/// direction equals ASC). Nested queries must match exactly.
struct ComponentVerdicts {
  bool select = true;
  bool from = true;
  bool where = true;
  bool group_by = true;
  bool having = true;
  bool order_by = true;
  bool compound = true;

  bool exact() const { return select && from && where && group_by && having && order_by && compound; }
  friend bool operator==(const ComponentVerdicts&, const ComponentVerdicts&) = default;
};

inline constexpr const char* kComponentNames[] = {"select", "from", "where", "group_by", "having", "order_by", "compound"};

/// Verdict by name (one of kComponentNames).
bool verdict(const ComponentVerdicts& v, std::string_view component);

ComponentVerdicts component_match(const SqlAst& predicted, const SqlAst& gold);
bool exact_set_match(const SqlAst& predicted, const SqlAst& gold);

/// The same comparisons for single clauses of one kind (slots compare by index).
bool clauses_equivalent(const Clause& a, const Clause& b);

nlohmann::ordered_json to_json(const ComponentVerdicts& v);

/// Spider-style difficulty bucket: "easy", "medium", "hard" or "extra".
std::string difficulty(const SqlAst& query);

struct CorpusItem {
  std::string id;
  std::string db_id;
  std::string question;
  std::string gold_sql;
  std::string difficulty;  // empty: computed from the gold query
  std::optional<std::string> predicted_sql;
  /// Golden explanation step texts, when the corpus carries them.
  std::vector<std::string> explanation;
};

/// One JSON object per line: {id, db_id, question, gold_sql, difficulty?, predicted_sql?, explanation?}.
std::vector<CorpusItem> load_corpus(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const CorpusItem& item);

/// Outcome of one query before and after refinement.
struct EvaluationRecord {
  std::string id;
  std::string difficulty;
  ComponentVerdicts before;
  ComponentVerdicts after;
  int rounds = 0;
  bool error = false;
  std::optional<bool> execution_before;
  std::optional<bool> execution_after;
};

struct AccuracyReport {
  struct Bucket {
    std::size_t total = 0;
    std::size_t exact_before = 0;
    std::size_t exact_after = 0;
  };
  std::size_t total = 0;
  std::size_t exact_before = 0;
  std::size_t exact_after = 0;
  std::size_t errors = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> components;  // name -> (before, after) matches
  std::map<std::string, Bucket> by_difficulty;
  std::map<int, std::size_t> rounds;  // rounds used by solved queries
  std::optional<std::pair<std::size_t, std::size_t>> execution;  // (before, after) matches over executed items
  std::size_t executed = 0;
};

AccuracyReport accuracy_report(const std::vector<EvaluationRecord>& records);
nlohmann::ordered_json to_json(const AccuracyReport& report);

}  // namespace clausewise
