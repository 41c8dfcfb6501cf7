#include <gtest/gtest.h>

#include <deque>
#include <map>
#include <set>

#include "clausewise/compose.hpp"
#include "clausewise/decompose.hpp"
#include "clausewise/errors.hpp"
#include "clausewise/evaluator.hpp"
#include "clausewise/sql.hpp"
#include "fixtures.hpp"
#include "support/random_query.hpp"

using namespace clausewise;

namespace {

const SchemaCatalog& concert() { return fixtures::schema("concert_singer"); }

Clause clause(const std::string& sql, const SchemaCatalog& s, const std::vector<std::string>& scope) {
  return parse_clause(sql, s, scope);
}

/// Hop count of the shortest undirected foreign-key path, by plain BFS.
int bfs_distance(const SchemaCatalog& s, const std::string& from, const std::string& to) {
  std::map<std::string, std::set<std::string>> adj;
  for (const auto& fk : s.foreign_keys()) {
    adj[fk.from_table].insert(fk.to_table);
    adj[fk.to_table].insert(fk.from_table);
  }
  std::map<std::string, int> dist{{from, 0}};
  std::deque<std::string> queue{from};
  while (!queue.empty()) {
    const auto t = queue.front();
    queue.pop_front();
    if (t == to) return dist[t];
    for (const auto& n : adj[t])
      if (!dist.count(n)) {
        dist[n] = dist[t] + 1;
        queue.push_back(n);
      }
  }
  return -1;
}

}  // namespace

TEST(Decompose, ClausesInExecutionOrder) {
  const auto tree = decompose(parse_sql("SELECT name FROM singer WHERE age > 3 ORDER BY age LIMIT 2", concert()));
  ASSERT_TRUE(tree.is_core());
  std::vector<ClauseKind> kinds;
  for (const auto& c : tree.core().clauses) kinds.push_back(c.kind);
  EXPECT_EQ(kinds, (std::vector<ClauseKind>{ClauseKind::FromJoinOn, ClauseKind::Where, ClauseKind::Select, ClauseKind::OrderBy}));
  EXPECT_EQ(tree.core().clauses.back().order().limit, 2);
}

TEST(Decompose, InSubqueryBecomesBlock) {
  const auto tree =
      decompose(parse_sql("SELECT name FROM singer WHERE singer_id IN (SELECT singer_id FROM singer_in_concert)", concert()));
  ASSERT_EQ(tree.core().blocks.size(), 1u);
  const auto& where = tree.core().clauses[1].filter().condition;
  EXPECT_TRUE(std::holds_alternative<SubquerySlot>(where.predicate->rhs));
  EXPECT_EQ(nesting_depth(tree), 1);
}

TEST(Decompose, ScalarSubqueryStaysInline) {
  const auto tree = decompose(parse_sql("SELECT name FROM singer WHERE age > (SELECT AVG(age) FROM singer)", concert()));
  EXPECT_TRUE(tree.core().blocks.empty());
}

TEST(Decompose, CompoundSplitsBothSides) {
  const auto tree = decompose(parse_sql("SELECT name FROM singer EXCEPT SELECT name FROM stadium", concert()));
  ASSERT_FALSE(tree.is_core());
  EXPECT_EQ(tree.compound().op, SetOp::Except);
  const auto order = execution_order(tree);
  ASSERT_EQ(order.size(), 7u);
  EXPECT_EQ(order.front().role, StepSlot::Role::BlockHeader);
  EXPECT_EQ(order.back().role, StepSlot::Role::Combine);
}

TEST(Merge, FiltersAreConjoinedInOrder) {
  const std::vector<std::string> scope{"singer"};
  const auto merged = merge_same_level({clause("FROM singer", concert(), scope), clause("WHERE age > 3", concert(), scope),
                                        clause("SELECT name", concert(), scope), clause("WHERE country = 'x'", concert(), scope)});
  ASSERT_EQ(merged.size(), 3u);
  EXPECT_EQ(merged[1].kind, ClauseKind::Where);
  EXPECT_EQ(render_clause(merged[1], scope), "WHERE age > 3 AND country = 'x'");
}

TEST(Merge, SelectItemsDeduplicated) {
  const std::vector<std::string> scope{"singer"};
  const auto merged = merge_same_level({clause("SELECT name, age", concert(), scope), clause("SELECT age, country", concert(), scope)});
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(render_clause(merged[0], scope), "SELECT name, age, country");
}

TEST(Merge, BareLimitJoinsTheSort) {
  const std::vector<std::string> scope{"singer"};
  Clause limit = Clause::order_by(std::nullopt, 3);
  const auto merged = merge_same_level({clause("ORDER BY age DESC", concert(), scope), limit});
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(render_clause(merged[0], scope), "ORDER BY age DESC LIMIT 3");
}

TEST(JoinPath, DirectForeignKey) {
  const auto joins = join_path({"concert"}, "stadium", concert());
  ASSERT_EQ(joins.size(), 1u);
  EXPECT_EQ(joins[0].table, "stadium");
  ASSERT_TRUE(joins[0].on);
  EXPECT_EQ(joins[0].on->predicate->lhs.column, (ColumnRef{"concert", "stadium_id"}));
}

TEST(JoinPath, ThroughBridgeTable) {
  const auto joins = join_path({"singer"}, "concert", concert());
  ASSERT_EQ(joins.size(), 2u);
  EXPECT_EQ(joins[0].table, "singer_in_concert");
  EXPECT_EQ(joins[1].table, "concert");
}

TEST(JoinPath, AlreadyPresentIsEmpty) { EXPECT_TRUE(join_path({"singer", "stadium"}, "stadium", concert()).empty()); }

TEST(JoinPath, UnreachableTableIsUnjoinable) {
  const auto s = load_schema_text(R"({"db_id": "islands", "tables": {"a": [["x", "number"]], "b": [["y", "number"]]}})");
  try {
    join_path({"a"}, "b", s);
    FAIL() << "expected ComposeError";
  } catch (const ComposeError& e) {
    EXPECT_EQ(e.kind(), ComposeError::Kind::Unjoinable);
    EXPECT_EQ(e.tables(), (std::vector<std::string>{"a", "b"}));
  }
}

// Path length matches an independent BFS, and every hop is a declared foreign key
// whose near end is already joined.
TEST(JoinPath, ShortestAgreesWithBfs) {
  for (const char* db : {"concert_singer", "college", "flight_network"}) {
    const auto& s = fixtures::schema(db);
    for (const auto& a : s.tables())
      for (const auto& b : s.tables()) {
        const int expected = bfs_distance(s, a.name, b.name);
        const auto joins = join_path({a.name}, b.name, s);
        ASSERT_EQ(static_cast<int>(joins.size()), expected) << a.name << " -> " << b.name;
        std::set<std::string> joined{a.name};
        for (const auto& j : joins) {
          ASSERT_TRUE(j.on);
          const auto& p = *j.on->predicate;
          const auto& l = p.lhs.column;
          const auto& r = std::get<ValueExpr>(p.rhs).column;
          bool declared = false;
          for (const auto& fk : s.foreign_keys())
            declared = declared || (fk.from_table == l.table && fk.from_column == l.column && fk.to_table == r.table &&
                                    fk.to_column == r.column);
          EXPECT_TRUE(declared);
          EXPECT_TRUE(joined.count(l.table) || joined.count(r.table));
          EXPECT_TRUE(l.table == j.table || r.table == j.table);
          joined.insert(j.table);
        }
        if (!joins.empty()) EXPECT_EQ(joins.back().table, b.name);
      }
  }
}

TEST(RewriteFromJoin, AddsMissingTables) {
  const auto joins = rewrite_from_join({{"singer", std::nullopt}}, {"singer", "stadium"}, concert());
  std::vector<std::string> tables;
  for (const auto& j : joins) tables.push_back(j.table);
  EXPECT_EQ(tables, (std::vector<std::string>{"singer", "singer_in_concert", "concert", "stadium"}));
}

TEST(RewriteFromJoin, FillsMissingOnWhenAsked) {
  const auto kept = rewrite_from_join({{"concert", std::nullopt}, {"stadium", std::nullopt}}, {}, concert(), false);
  EXPECT_FALSE(kept[1].on);
  const auto filled = rewrite_from_join({{"concert", std::nullopt}, {"stadium", std::nullopt}}, {}, concert(), true);
  ASSERT_TRUE(filled.back().on);
}

TEST(Compose, MissingFromIsDerived) {
  CoreTree core;
  core.clauses.push_back(clause("SELECT name", concert(), {"singer"}));
  core.clauses.push_back(clause("WHERE age > 20", concert(), {"singer"}));
  const auto q = compose(ClauseTree{core}, concert());
  EXPECT_EQ(render_sql(q), "SELECT name FROM singer WHERE age > 20");
}

TEST(Compose, MissingSelectIsAnError) {
  CoreTree core;
  core.clauses.push_back(clause("FROM singer", concert(), {"singer"}));
  try {
    compose(ClauseTree{core}, concert());
    FAIL() << "expected ComposeError";
  } catch (const ComposeError& e) {
    EXPECT_EQ(e.kind(), ComposeError::Kind::MissingSelect);
  }
}

TEST(Compose, EmptyTreeIsAnError) {
  try {
    compose(ClauseTree{CoreTree{}}, concert());
    FAIL() << "expected ComposeError";
  } catch (const ComposeError& e) {
    EXPECT_EQ(e.kind(), ComposeError::Kind::EmptyTree);
  }
}

TEST(Compose, IdentityOnRandomQueries) {
  for (const char* db : {"concert_singer", "college", "flight_network"}) {
    const auto& s = fixtures::schema(db);
    fixtures::RandomQueries gen(s, 99);
    for (int i = 0; i < 300; ++i) {
      const auto q = gen.query(2);
      const auto back = compose(decompose(q), s);
      ASSERT_TRUE(exact_set_match(back, q)) << render_sql(q) << "\n" << render_sql(back);
    }
  }
}

TEST(Compose, IdentityOnGoldenCorpus) {
  for (const auto& item : load_corpus(fixtures::data_path("corpus/golden.jsonl"))) {
    const auto& s = fixtures::schema(item.db_id);
    const auto q = parse_sql(item.gold_sql, s);
    EXPECT_TRUE(exact_set_match(compose(decompose(q), s), q)) << item.id;
  }
}
