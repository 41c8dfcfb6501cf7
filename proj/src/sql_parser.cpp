#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "clausewise/errors.hpp"
#include "clausewise/sql.hpp"
#include "clausewise/text.hpp"

namespace clausewise {

SqlSyntaxError::SqlSyntaxError(std::size_t position, std::vector<std::string> expected, const std::string& found)
    : Error("syntax error at position " + std::to_string(position) + " near " + (found.empty() ? "end of input" : "'" + found + "'") +
            (expected.empty() ? std::string() : ": expected " + text::join(expected, " or "))),
      position_(position),
      expected_(std::move(expected)) {}

namespace {

enum class Tok { Ident, Keyword, Number, String, Symbol, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;  // keywords upper-cased, identifiers as written
  std::size_t pos = 0;
};

const std::set<std::string> kKeywords = {"SELECT", "DISTINCT", "FROM",  "JOIN",   "INNER",     "ON",    "AS",
                                         "WHERE",  "GROUP",    "BY",    "HAVING", "ORDER",     "ASC",   "DESC",
                                         "LIMIT",  "AND",      "OR",    "NOT",    "IN",        "LIKE",  "BETWEEN",
                                         "INTERSECT", "UNION", "EXCEPT"};

std::vector<Token> lex(std::string_view sql) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < sql.size()) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < sql.size() && (std::isalnum(static_cast<unsigned char>(sql[i])) || sql[i] == '_')) ++i;
      std::string word(sql.substr(start, i - start));
      std::string up = text::upper(word);
      if (kKeywords.count(up))
        out.push_back({Tok::Keyword, up, start});
      else
        out.push_back({Tok::Ident, word, start});
      continue;
    }
    if (c == '`') {
      const auto close = sql.find('`', i + 1);
      if (close == std::string_view::npos) throw SqlSyntaxError(start, {"closing '`'"}, "`");
      out.push_back({Tok::Ident, std::string(sql.substr(i + 1, close - i - 1)), start});
      i = close + 1;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
      while (i < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      if (i < sql.size() && sql[i] == '.' && i + 1 < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i + 1]))) {
        ++i;
        while (i < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
      }
      out.push_back({Tok::Number, std::string(sql.substr(start, i - start)), start});
      continue;
    }
    if (c == '\'' || c == '"') {
      std::string value;
      ++i;
      bool closed = false;
      while (i < sql.size()) {
        if (sql[i] == c) {
          if (i + 1 < sql.size() && sql[i + 1] == c) {
            value.push_back(c);
            i += 2;
            continue;
          }
          closed = true;
          ++i;
          break;
        }
        value.push_back(sql[i++]);
      }
      if (!closed) throw SqlSyntaxError(start, {std::string("closing ") + c}, std::string(1, c));
      out.push_back({Tok::String, value, start});
      continue;
    }
    static const char* kTwo[] = {">=", "<=", "!=", "<>"};
    bool matched = false;
    for (const char* two : kTwo) {
      if (sql.substr(i, 2) == two) {
        out.push_back({Tok::Symbol, std::string(two) == "<>" ? "!=" : two, start});
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("(),.*=<>;-").find(c) != std::string_view::npos) {
      out.push_back({Tok::Symbol, std::string(1, c), start});
      ++i;
      continue;
    }
    throw SqlSyntaxError(start, {}, std::string(1, c));
  }
  out.push_back({Tok::End, "", sql.size()});
  return out;
}

/// Table names and aliases visible inside one select core.
struct AliasScope {
  std::map<std::string, std::string> tables;  // lowercased alias or name -> canonical table
};

class Parser {
 public:
  Parser(std::string_view sql, const SchemaCatalog& schema) : tokens_(lex(sql)), schema_(schema) {}

  SqlAst parse_statement() {
    SqlAst q = parse_set_expr();
    if (peek_symbol(";")) advance();
    if (peek().kind != Tok::End) fail({"end of query"});
    return q;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)]; }
  const Token& advance() { return tokens_[pos_ < tokens_.size() - 1 ? pos_++ : pos_]; }
  bool peek_keyword(std::string_view kw, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Keyword && peek(ahead).text == kw;
  }
  bool peek_symbol(std::string_view s, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Symbol && peek(ahead).text == s;
  }
  bool accept_keyword(std::string_view kw) {
    if (!peek_keyword(kw)) return false;
    advance();
    return true;
  }
  bool accept_symbol(std::string_view s) {
    if (!peek_symbol(s)) return false;
    advance();
    return true;
  }
  [[noreturn]] void fail(std::vector<std::string> expected) const {
    throw SqlSyntaxError(peek().pos, std::move(expected), peek().text);
  }
  void expect_keyword(std::string_view kw) {
    if (!accept_keyword(kw)) fail({std::string(kw)});
  }
  void expect_symbol(std::string_view s) {
    if (!accept_symbol(s)) fail({"'" + std::string(s) + "'"});
  }

  static std::optional<AggFunc> agg_of(const Token& t) {
    if (t.kind != Tok::Ident) return std::nullopt;
    const auto up = text::upper(t.text);
    if (up == "COUNT") return AggFunc::Count;
    if (up == "AVG") return AggFunc::Avg;
    if (up == "MAX") return AggFunc::Max;
    if (up == "MIN") return AggFunc::Min;
    if (up == "SUM") return AggFunc::Sum;
    return std::nullopt;
  }

  SqlAst parse_set_expr() {
    SqlAst left = parse_primary();
    while (true) {
      std::optional<SetOp> op;
      if (peek_keyword("INTERSECT")) op = SetOp::Intersect;
      else if (peek_keyword("UNION")) op = SetOp::Union;
      else if (peek_keyword("EXCEPT")) op = SetOp::Except;
      if (!op) break;
      advance();
      SqlAst right = parse_primary();
      left = SqlAst{Compound{*op, Box<Query>(std::move(left)), Box<Query>(std::move(right))}};
    }
    return left;
  }

  SqlAst parse_primary() {
    if (accept_symbol("(")) {
      SqlAst q = parse_set_expr();
      expect_symbol(")");
      return q;
    }
    if (!peek_keyword("SELECT")) fail({"SELECT", "'('"});
    return SqlAst{parse_core()};
  }

  struct RawColumn {
    std::string qualifier;
    std::string column;
    std::size_t pos = 0;
  };

  SelectCore parse_core() {
    expect_keyword("SELECT");
    SelectCore core;
    core.distinct = accept_keyword("DISTINCT");
    // Column references hold raw (qualifier, name) pairs until the FROM list is known.
    do {
      core.select.push_back(parse_value(true));
    } while (accept_symbol(","));

    AliasScope scope;
    if (!peek_keyword("FROM")) fail({"FROM", "','"});
    advance();
    parse_table(core, scope);
    while (peek_keyword("JOIN") || peek_keyword("INNER")) {
      if (accept_keyword("INNER")) {
        if (!peek_keyword("JOIN")) fail({"JOIN"});
      }
      advance();
      parse_table(core, scope);
      if (accept_keyword("ON")) {
        core.from.back().on = parse_or();
      }
    }
    if (accept_keyword("WHERE")) core.where = parse_or();
    if (accept_keyword("GROUP")) {
      expect_keyword("BY");
      do {
        core.group_by.push_back(parse_value(false));
      } while (accept_symbol(","));
    }
    if (accept_keyword("HAVING")) core.having = parse_or();
    if (accept_keyword("ORDER")) {
      expect_keyword("BY");
      OrderBy ob;
      std::optional<SortDir> dir;
      do {
        // One sort direction applies to the whole key list.
        if (dir) fail({"LIMIT", "end of ORDER BY"});
        ob.keys.push_back(parse_value(false));
        if (accept_keyword("ASC")) dir = SortDir::Asc;
        else if (accept_keyword("DESC")) dir = SortDir::Desc;
      } while (accept_symbol(","));
      ob.dir = dir.value_or(SortDir::None);
      core.order_by = std::move(ob);
    }
    if (accept_keyword("LIMIT")) {
      const Token& t = peek();
      if (t.kind != Tok::Number || t.text.find('.') != std::string::npos || std::stoll(t.text) <= 0)
        fail({"positive integer"});
      core.limit = std::stoll(t.text);
      advance();
    }

    for (auto& v : core.select) resolve(v, scope, core);
    for (auto& v : core.group_by) resolve(v, scope, core);
    if (core.order_by)
      for (auto& v : core.order_by->keys) resolve(v, scope, core);
    for (auto& j : core.from)
      if (j.on) resolve(*j.on, scope, core);
    if (core.where) resolve(*core.where, scope, core);
    if (core.having) resolve(*core.having, scope, core);
    return core;
  }

  void parse_table(SelectCore& core, AliasScope& scope) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) fail({"table name"});
    const TableInfo* info = schema_.find_table(t.text);
    if (!info) throw ResolutionError(t.text, "unknown table '" + t.text + "'");
    advance();
    core.from.push_back(JoinSpec{info->name, std::nullopt});
    scope.tables[text::lower(info->name)] = info->name;
    if (accept_keyword("AS")) {
      if (peek().kind != Tok::Ident) fail({"alias"});
      scope.tables[text::lower(advance().text)] = info->name;
    } else if (peek().kind == Tok::Ident) {
      scope.tables[text::lower(advance().text)] = info->name;
    }
  }

  RawColumn parse_column_name() {
    const Token& t = peek();
    if (accept_symbol("*")) return {"", "*", t.pos};
    if (t.kind != Tok::Ident) fail({"column", "'*'"});
    RawColumn raw{"", advance().text, t.pos};
    if (accept_symbol(".")) {
      raw.qualifier = raw.column;
      if (accept_symbol("*")) {
        raw.column = "*";
      } else {
        if (peek().kind != Tok::Ident) fail({"column"});
        raw.column = advance().text;
      }
    }
    return raw;
  }

  // Parses noun or func(noun); the ColumnRef holds the raw qualifier and name.
  ValueExpr parse_value(bool allow_star) {
    ValueExpr v;
    if (auto f = agg_of(peek()); f && peek_symbol("(", 1)) {
      advance();
      advance();
      v.func = *f;
      v.distinct = accept_keyword("DISTINCT");
      RawColumn raw = parse_column_name();
      expect_symbol(")");
      if (raw.column == "*" && v.func != AggFunc::Count) throw SqlSyntaxError(raw.pos, {"column"}, "*");
      v.column = {raw.qualifier, raw.column};
      return v;
    }
    if (peek().kind != Tok::Ident && !peek_symbol("*")) fail({"column", "aggregate", "'*'"});
    RawColumn raw = parse_column_name();
    if (raw.column == "*" && !allow_star) throw SqlSyntaxError(raw.pos, {"column"}, "*");
    v.column = {raw.qualifier, raw.column};
    return v;
  }

  std::optional<Literal> parse_literal() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      advance();
      return Literal::number(t.text);
    }
    if (t.kind == Tok::String) {
      advance();
      return Literal::string(t.text);
    }
    if (peek_symbol("-") && peek(1).kind == Tok::Number) {
      advance();
      return Literal::number("-" + advance().text);
    }
    return std::nullopt;
  }

  Operand parse_operand(bool allow_subquery) {
    if (auto lit = parse_literal()) return *lit;
    if (peek_symbol("(")) {
      if (!allow_subquery) fail({"literal", "column"});
      advance();
      SqlAst q = parse_set_expr();
      expect_symbol(")");
      return Box<Query>(std::move(q));
    }
    return parse_value(false);
  }

  Condition parse_or() {
    Condition left = parse_and();
    while (accept_keyword("OR")) left = Condition::either(std::move(left), parse_and());
    return left;
  }

  Condition parse_and() {
    Condition left = parse_unary();
    while (accept_keyword("AND")) left = Condition::both(std::move(left), parse_unary());
    return left;
  }

  Condition parse_unary() {
    if (accept_keyword("NOT")) return Condition::negate(parse_unary());
    if (accept_symbol("(")) {
      Condition c = parse_or();
      expect_symbol(")");
      return c;
    }
    return Condition::leaf(parse_predicate());
  }

  Predicate parse_predicate() {
    Predicate p;
    p.lhs = parse_value(false);
    if (accept_keyword("NOT")) {
      if (accept_keyword("IN")) p.op = CmpOp::NotIn;
      else if (accept_keyword("LIKE")) p.op = CmpOp::NotLike;
      else fail({"IN", "LIKE"});
    } else if (accept_keyword("IN")) {
      p.op = CmpOp::In;
    } else if (accept_keyword("LIKE")) {
      p.op = CmpOp::Like;
    } else if (accept_keyword("BETWEEN")) {
      p.op = CmpOp::Between;
    } else if (peek().kind == Tok::Symbol) {
      const auto s = peek().text;
      if (s == "=") p.op = CmpOp::Eq;
      else if (s == "!=") p.op = CmpOp::Ne;
      else if (s == ">") p.op = CmpOp::Gt;
      else if (s == ">=") p.op = CmpOp::Ge;
      else if (s == "<") p.op = CmpOp::Lt;
      else if (s == "<=") p.op = CmpOp::Le;
      else fail({"comparison operator"});
      advance();
    } else {
      fail({"comparison operator"});
    }

    if (p.op == CmpOp::In || p.op == CmpOp::NotIn) {
      if (!peek_symbol("(")) fail({"'('"});
      p.rhs = parse_operand(true);
      if (!std::holds_alternative<Box<Query>>(p.rhs)) fail({"subquery"});
    } else if (p.op == CmpOp::Between) {
      p.rhs = parse_operand(false);
      expect_keyword("AND");
      p.upper = parse_operand(false);
    } else if (p.op == CmpOp::Like || p.op == CmpOp::NotLike) {
      if (peek().kind != Tok::String) fail({"pattern string"});
      p.rhs = *parse_literal();
    } else {
      p.rhs = parse_operand(true);
    }
    return p;
  }

  ColumnRef resolve_column(const std::string& qualifier, const std::string& column, const AliasScope& scope,
                           const SelectCore& core) const {
    if (column == "*") return ColumnRef::star();
    if (!qualifier.empty()) {
      std::string table;
      if (auto it = scope.tables.find(text::lower(qualifier)); it != scope.tables.end()) {
        table = it->second;
      } else if (const TableInfo* t = schema_.find_table(qualifier)) {
        table = t->name;
      } else {
        throw ResolutionError(qualifier, "unknown table or alias '" + qualifier + "'");
      }
      const ColumnInfo* c = schema_.find_column(table, column);
      if (!c) throw ResolutionError(qualifier + "." + column, "unknown column '" + table + "." + column + "'");
      return {table, c->name};
    }
    std::vector<ColumnRef> candidates;
    for (const auto& j : core.from) {
      if (const ColumnInfo* c = schema_.find_column(j.table, column)) {
        ColumnRef ref{j.table, c->name};
        if (std::find(candidates.begin(), candidates.end(), ref) == candidates.end()) candidates.push_back(ref);
      }
    }
    if (candidates.empty()) throw ResolutionError(column, "unknown column '" + column + "'");
    if (candidates.size() > 1) throw ResolutionError(column, "ambiguous column '" + column + "'");
    return candidates.front();
  }

  void resolve(ValueExpr& v, const AliasScope& scope, const SelectCore& core) const {
    v.column = resolve_column(v.column.table, v.column.column, scope, core);
  }

  void resolve(Condition& c, const AliasScope& scope, const SelectCore& core) const {
    if (c.kind != Condition::Kind::Predicate) {
      for (auto& child : c.children) resolve(child, scope, core);
      return;
    }
    auto& p = *c.predicate;
    resolve(p.lhs, scope, core);
    auto operand = [&](Operand& o) {
      if (auto* v = std::get_if<ValueExpr>(&o)) resolve(*v, scope, core);
    };
    operand(p.rhs);
    if (p.upper) operand(*p.upper);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const SchemaCatalog& schema_;
};

}  // namespace

SqlAst parse_sql(std::string_view sql, const SchemaCatalog& schema) {
  Parser parser(sql, schema);
  return parser.parse_statement();
}

}  // namespace clausewise
