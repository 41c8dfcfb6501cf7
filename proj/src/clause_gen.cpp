#include "clausewise/clause_gen.hpp"

#include <algorithm>
#include <map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "clausewise/editor.hpp"
#include "clausewise/errors.hpp"
#include "clausewise/explain.hpp"
#include "clausewise/sites.hpp"
#include "clausewise/text.hpp"

namespace clausewise {

namespace {

using Phrase = std::vector<std::string>;

/// A template word together with its synonyms, each split into words; longest first.
std::vector<Phrase> phrase_set(const std::string& word, std::vector<std::string> extra = {}) {
  std::vector<std::string> all{word};
  for (const auto& tw : template_words())
    if (tw.word == word) all.insert(all.end(), tw.synonyms.begin(), tw.synonyms.end());
  all.insert(all.end(), extra.begin(), extra.end());
  std::vector<Phrase> out;
  for (const auto& s : all) {
    Phrase p = text::split_words(s);
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
  }
  std::stable_sort(out.begin(), out.end(), [](const Phrase& a, const Phrase& b) { return a.size() > b.size(); });
  return out;
}

struct Vocabulary {
  std::vector<Phrase> ret = phrase_set("return");
  std::vector<Phrase> keep_records = phrase_set("keep the records where");
  std::vector<Phrase> greater = phrase_set("greater than");
  std::vector<Phrase> less = phrase_set("less than");
  std::vector<Phrase> ascending = phrase_set("ascending");
  std::vector<Phrase> descending = phrase_set("descending");
  std::vector<Phrase> maximum = phrase_set("maximum");
  std::vector<Phrase> minimum = phrase_set("minimum");
  std::vector<Phrase> number_of = phrase_set("number of");
  std::vector<Phrase> form = phrase_set("in the form of");
  std::vector<Phrase> based_on = phrase_set("based on");
  std::vector<Phrase> distinct = phrase_set("distinct");
  std::vector<Phrase> all = phrase_set("all");
  std::vector<Phrase> group = phrase_set("group");
  std::vector<Phrase> sort = phrase_set("sort");
};

const Vocabulary& vocab() {
  static const Vocabulary v;
  return v;
}

struct Token {
  enum class Kind { Word, Column, Table, Literal };
  Kind kind = Kind::Word;
  std::string word;  // lower-cased text for words and punctuation
  Chunk chunk;
};

std::vector<Token> tokenize(std::string_view text, const SchemaCatalog& schema, const std::vector<std::string>& scope) {
  ChunkOptions options;
  options.preferred_tables = scope;
  std::vector<Token> out;
  for (auto& c : chunk(text, schema, options)) {
    if (c.cls == ChunkClass::Other) {
      for (auto& w : text::split_words(text::lower(c.text))) {
        if (w == "." ) continue;
        Token t;
        t.word = std::move(w);
        out.push_back(std::move(t));
      }
      continue;
    }
    Token t;
    t.kind = c.cls == ChunkClass::Column ? Token::Kind::Column : c.cls == ChunkClass::Table ? Token::Kind::Table : Token::Kind::Literal;
    t.word = text::lower(c.text);
    t.chunk = std::move(c);
    out.push_back(std::move(t));
  }
  // A trailing full stop on the last word.
  if (!out.empty() && out.back().kind == Token::Kind::Word && out.back().word.size() > 1 && out.back().word.back() == '.')
    out.back().word.pop_back();
  return out;
}

/// Word-level view used for cue detection, without schema binding.
std::vector<std::string> plain_words(std::string_view text) {
  std::string cleaned;
  for (char c : text) cleaned.push_back(c == ',' || c == ':' || c == '(' || c == ')' ? ' ' : c);
  auto words = text::split_words(text::lower(cleaned));
  if (!words.empty() && words.back().size() > 1 && words.back().back() == '.') words.back().pop_back();
  return words;
}

std::size_t match_words(const std::vector<std::string>& words, std::size_t pos, const std::vector<Phrase>& set) {
  for (const auto& p : set) {
    if (pos + p.size() > words.size()) continue;
    if (std::equal(p.begin(), p.end(), words.begin() + static_cast<std::ptrdiff_t>(pos))) return p.size();
  }
  return 0;
}

bool starts_limit(const std::vector<std::string>& words, std::size_t pos) {
  if (pos + 2 >= words.size() || words[pos] != "the") return false;
  if (words[pos + 1] == "first" && words[pos + 2] == "record") return true;
  return (words[pos + 1] == "top" || words[pos + 1] == "first") && text::is_number(words[pos + 2]);
}

class PhraseParser {
 public:
  PhraseParser(std::vector<Token> tokens, const GenerationContext& ctx) : toks_(std::move(tokens)), ctx_(ctx) {}

  Clause parse(ClauseKind kind) {
    Clause out;
    switch (kind) {
      case ClauseKind::FromJoinOn: out = from_clause(); break;
      case ClauseKind::Where:
        if (!accept_any(vocab().keep_records)) fail("'keep the records where'");
        out = Clause::where(condition());
        break;
      case ClauseKind::Having:
        if (!accept({"keep", "the", "groups", "where"})) fail("'keep the groups where'");
        out = Clause::having(condition());
        break;
      case ClauseKind::GroupBy:
        if (!accept_any(vocab().group)) fail("'group'");
        expect({"the", "records"});
        if (!accept_any(vocab().based_on)) fail("'based on'");
        out = Clause::group_by(values());
        break;
      case ClauseKind::Select: out = select_clause(); break;
      case ClauseKind::OrderBy: out = order_clause(); break;
    }
    if (pos_ < toks_.size()) fail("end of sentence");
    return out;
  }

 private:
  // ---- token helpers
  bool word_at(std::size_t i, std::string_view w) const {
    return i < toks_.size() && toks_[i].kind == Token::Kind::Word && toks_[i].word == w;
  }
  bool peek(std::string_view w) const { return word_at(pos_, w); }
  std::size_t match_at(std::size_t i, const Phrase& p) const {
    for (std::size_t k = 0; k < p.size(); ++k)
      if (!word_at(i + k, p[k])) return 0;
    return p.size();
  }
  std::size_t match_any_at(std::size_t i, const std::vector<Phrase>& set) const {
    for (const auto& p : set)
      if (std::size_t n = match_at(i, p)) return n;
    return 0;
  }
  bool accept(const Phrase& p) {
    const std::size_t n = match_at(pos_, p);
    pos_ += n;
    return n > 0;
  }
  bool accept_any(const std::vector<Phrase>& set) {
    const std::size_t n = match_any_at(pos_, set);
    pos_ += n;
    return n > 0;
  }
  void expect(const Phrase& p) {
    if (!accept(p)) fail("'" + text::join(p, " ") + "'");
  }
  [[noreturn]] void fail(const std::string& expected) const {
    const std::string found = pos_ < toks_.size() ? "'" + display(toks_[pos_]) + "'" : "end of sentence";
    throw GenerationError(GenerationError::Kind::Unparseable, "expected " + expected + " but found " + found);
  }
  static std::string display(const Token& t) { return t.kind == Token::Kind::Word ? t.word : t.chunk.text; }

  const SchemaCatalog& schema() const { return *ctx_.schema; }

  // ---- entities
  std::string table_token() {
    if (pos_ < toks_.size() && toks_[pos_].kind == Token::Kind::Table) return toks_[pos_++].chunk.binding->table;
    if (pos_ < toks_.size()) {
      // A table whose name is also a column phrase.
      if (const TableInfo* t = find_table_phrase(display(toks_[pos_]))) {
        ++pos_;
        return t->name;
      }
    }
    throw GenerationError(GenerationError::Kind::UnboundEntity,
                          "expected a table name" + (pos_ < toks_.size() ? " but found '" + display(toks_[pos_]) + "'" : std::string()));
  }

  const TableInfo* find_table_phrase(const std::string& phrase) const {
    for (const auto& t : schema().tables())
      if (text::iequals(t.name, phrase) || text::iequals(schema().table_phrase(t.name), phrase)) return &t;
    return nullptr;
  }

  std::optional<ColumnRef> column_in(const std::string& table, const std::string& phrase, const std::string& raw) const {
    const TableInfo* t = schema().find_table(table);
    if (!t) return std::nullopt;
    for (const auto& c : t->columns)
      if (text::iequals(c.name, raw) || text::iequals(schema().column_phrase(t->name, c.name), phrase))
        return ColumnRef{t->name, c.name};
    return std::nullopt;
  }

  ColumnRef column_ref() {
    if (pos_ >= toks_.size()) fail("a column");
    const Token& t = toks_[pos_];
    ColumnRef col;
    std::string phrase = display(t);
    if (t.kind == Token::Kind::Column) {
      col = *t.chunk.binding;
    } else if (t.kind == Token::Kind::Table) {
      // A column spelled like a table.
      std::optional<ColumnRef> found;
      for (const auto& s : ctx_.scope)
        if (!found) found = column_in(s, phrase, phrase);
      for (const auto& s : schema().tables())
        if (!found) found = column_in(s.name, phrase, phrase);
      if (!found) throw GenerationError(GenerationError::Kind::UnboundEntity, "'" + phrase + "' is not a column");
      col = *found;
    } else {
      throw GenerationError(GenerationError::Kind::UnboundEntity, "'" + phrase + "' is not a column of the database");
    }
    ++pos_;
    if (peek("of") && pos_ + 1 < toks_.size() &&
        (toks_[pos_ + 1].kind == Token::Kind::Table || find_table_phrase(display(toks_[pos_ + 1])))) {
      ++pos_;
      const std::string table = table_token();
      auto rebound = column_in(table, phrase, col.column);
      if (!rebound)
        throw GenerationError(GenerationError::Kind::UnboundEntity, "table '" + table + "' has no column '" + phrase + "'");
      col = *rebound;
    }
    return col;
  }

  bool at_value_start() const {
    if (pos_ >= toks_.size()) return false;
    const Token& t = toks_[pos_];
    if (t.kind == Token::Kind::Column || t.kind == Token::Kind::Table) return true;
    if (t.kind != Token::Kind::Word) return false;
    if (match_any_at(pos_, vocab().ret) || match_at(pos_, {"table"})) return false;
    return t.word == "the" || match_any_at(pos_, vocab().all) > 0;
  }

  ValueExpr value() {
    ValueExpr v;
    if (const std::size_t n = match_any_at(pos_, vocab().all); n && match_at(pos_ + n, {"the", "records"})) {
      pos_ += n + 2;
      v.column = ColumnRef::star();
      return v;
    }
    accept({"the"});
    if (accept_any(vocab().number_of)) {
      v.func = AggFunc::Count;
      if (accept({"records"}) || accept({"record"})) {
        v.column = ColumnRef::star();
        return v;
      }
      v.distinct = accept_any(vocab().distinct);
      v.column = column_ref();
      return v;
    }
    std::optional<AggFunc> agg;
    const std::size_t before = pos_;
    if (accept({"average"})) agg = AggFunc::Avg;
    else if (accept_any(vocab().maximum)) agg = AggFunc::Max;
    else if (accept_any(vocab().minimum)) agg = AggFunc::Min;
    else if (accept({"sum"})) agg = AggFunc::Sum;
    if (agg && accept({"value", "of"})) {
      v.func = *agg;
      v.distinct = accept_any(vocab().distinct);
      v.column = column_ref();
      return v;
    }
    pos_ = before;
    v.column = column_ref();
    return v;
  }

  /// value {(","|"and") value}; stops before "and" that starts something else.
  std::vector<ValueExpr> values() {
    std::vector<ValueExpr> out{value()};
    while (true) {
      const std::size_t save = pos_;
      if (accept({","}) || accept({"and"})) {
        if (at_value_start()) {
          out.push_back(value());
          continue;
        }
      }
      pos_ = save;
      return out;
    }
  }

  // ---- conditions
  Condition condition() {
    Condition left = conjunction();
    while (accept({"or"})) left = Condition::either(std::move(left), conjunction());
    return left;
  }

  Condition conjunction() {
    Condition left = unary();
    while (peek("and") && !word_at(pos_ + 1, "table")) {
      ++pos_;
      left = Condition::both(std::move(left), unary());
    }
    return left;
  }

  Condition unary() {
    if (accept({"not"})) return Condition::negate(unary());
    if (accept({"("})) {
      Condition c = condition();
      expect({")"});
      return c;
    }
    return Condition::leaf(predicate());
  }

  CmpOp comparison() {
    expect({"is"});
    auto or_equal = [&] { return accept({"or", "equal", "to"}); };
    if (accept_any(vocab().greater)) return or_equal() ? CmpOp::Ge : CmpOp::Gt;
    if (accept_any(vocab().less)) return or_equal() ? CmpOp::Le : CmpOp::Lt;
    if (accept_any(vocab().form)) return CmpOp::Like;
    if (accept({"not"})) {
      if (accept_any(vocab().form)) return CmpOp::NotLike;
      if (accept({"in"})) return CmpOp::NotIn;
      return CmpOp::Ne;
    }
    if (accept({"between"})) return CmpOp::Between;
    if (accept({"in"})) return CmpOp::In;
    return CmpOp::Eq;
  }

  Operand operand() {
    if (pos_ < toks_.size() && toks_[pos_].kind == Token::Kind::Literal) return *toks_[pos_++].chunk.literal;
    if (peek("the") && pos_ + 2 < toks_.size() && word_at(pos_ + 2, "query")) {
      if (const std::size_t n = text::ordinal_value(toks_[pos_ + 1].word)) {
        pos_ += 3;
        return SubquerySlot{n - 1};
      }
    }
    std::vector<ValueExpr> items{value()};
    if (peek("in") && word_at(pos_ + 1, "table")) {
      pos_ += 2;
      const std::string table = table_token();
      SelectCore sub;
      for (auto& v : items) {
        if (!v.column.is_star()) {
          auto rebound = column_in(table, schema().column_phrase(v.column.table, v.column.column), v.column.column);
          if (!rebound) throw GenerationError(GenerationError::Kind::UnboundEntity, "table '" + table + "' has no column '" + v.column.column + "'");
          v.column = *rebound;
        }
      }
      sub.select = std::move(items);
      sub.from.push_back({table, std::nullopt});
      return Box<Query>(Query{std::move(sub)});
    }
    return items.front();
  }

  Predicate predicate() {
    Predicate p;
    p.lhs = value();
    p.op = comparison();
    p.rhs = operand();
    if (p.op == CmpOp::Between) {
      expect({"and"});
      p.upper = operand();
    }
    if ((p.op == CmpOp::In || p.op == CmpOp::NotIn) && !std::holds_alternative<SubquerySlot>(p.rhs) &&
        !std::holds_alternative<Box<Query>>(p.rhs))
      throw GenerationError(GenerationError::Kind::Unparseable, "'is in' needs a query");
    if ((p.op == CmpOp::Like || p.op == CmpOp::NotLike) &&
        !(std::holds_alternative<Literal>(p.rhs) && std::get<Literal>(p.rhs).kind == Literal::Kind::String))
      throw GenerationError(GenerationError::Kind::Unparseable, "'in the form of' needs a quoted pattern");
    return p;
  }

  // ---- clauses
  Clause from_clause() {
    expect({"in", "table"});
    std::vector<JoinSpec> joins;
    joins.push_back({table_token(), std::nullopt});
    if (peek("where")) fail("'and table'");
    while (accept({"and", "table"})) {
      JoinSpec j{table_token(), std::nullopt};
      if (accept({"where"})) j.on = condition();
      joins.push_back(std::move(j));
    }
    return Clause::from(std::move(joins));
  }

  Clause select_clause() {
    if (!accept_any(vocab().ret)) fail("'return'");
    bool distinct = false;
    if (const std::size_t n = match_any_at(pos_, vocab().distinct); n && match_at(pos_ + n, {"values", "of"})) {
      pos_ += n + 2;
      distinct = true;
    }
    return Clause::select(values(), distinct);
  }

  std::int64_t limit_phrase() {
    expect({"the"});
    if (accept({"first"})) {
      if (accept({"record"})) return 1;
    } else if (!accept({"top"})) {
      fail("'the first record' or 'the top N records'");
    }
    if (pos_ >= toks_.size() || toks_[pos_].kind != Token::Kind::Literal ||
        toks_[pos_].chunk.literal->kind != Literal::Kind::Number)
      fail("a number of records");
    const std::string n = toks_[pos_++].chunk.literal->text;
    if (!text::is_number(n) || n.find('.') != std::string::npos || n.front() == '-' || std::stoll(n) <= 0)
      throw GenerationError(GenerationError::Kind::Unparseable, "the number of records must be a positive integer");
    if (!accept({"records"})) expect({"record"});
    return std::stoll(n);
  }

  Clause order_clause() {
    if (const std::size_t n = match_any_at(pos_, vocab().ret); n) {
      pos_ += n;
      return Clause::order_by(std::nullopt, limit_phrase());
    }
    if (!accept_any(vocab().sort)) fail("'sort'");
    expect({"the", "records"});
    if (!accept_any(vocab().based_on)) fail("'based on'");
    OrderBy order;
    order.keys = values();
    if (peek("in")) {
      const std::size_t save = pos_++;
      if (accept_any(vocab().ascending)) order.dir = SortDir::Asc;
      else if (accept_any(vocab().descending)) order.dir = SortDir::Desc;
      else pos_ = save;
      if (pos_ != save) expect({"order"});
    }
    std::optional<std::int64_t> limit;
    if (accept({"and"})) {
      if (!accept_any(vocab().ret)) fail("'return'");
      limit = limit_phrase();
    }
    return Clause::order_by(std::move(order), limit);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const GenerationContext& ctx_;
};

void check_condition(const Condition& c, const GenerationContext& ctx);

void check_column(const ColumnRef& col, const GenerationContext& ctx) {
  if (col.is_star()) return;
  if (!ctx.schema->find_column(col.table, col.column))
    throw GenerationError(GenerationError::Kind::InvalidOutput, "unknown column '" + col.table + "." + col.column + "'");
}

void check_operand(const Operand& o, const GenerationContext& ctx) {
  if (auto* v = std::get_if<ValueExpr>(&o)) return check_column(v->column, ctx);
  if (auto* s = std::get_if<SubquerySlot>(&o)) {
    if (s->index >= ctx.block_count)
      throw GenerationError(GenerationError::Kind::InvalidOutput,
                            "there is no " + text::ordinal_word(s->index + 1) + " query to refer to");
    return;
  }
  if (auto* q = std::get_if<Box<Query>>(&o)) {
    if (!(*q)->is_core()) return;
    for (const auto& j : (*q)->core().from)
      if (!ctx.schema->find_table(j.table)) throw GenerationError(GenerationError::Kind::InvalidOutput, "unknown table '" + j.table + "'");
    for (const auto& v : (*q)->core().select) check_column(v.column, ctx);
  }
}

void check_condition(const Condition& c, const GenerationContext& ctx) {
  if (c.kind != Condition::Kind::Predicate) {
    for (const auto& child : c.children) check_condition(child, ctx);
    return;
  }
  check_column(c.predicate->lhs.column, ctx);
  check_operand(c.predicate->rhs, ctx);
  if (c.predicate->upper) check_operand(*c.predicate->upper, ctx);
}

}  // namespace

ClauseKind infer_clause_type(std::string_view text) {
  const auto words = plain_words(text);
  const auto& v = vocab();
  auto at_start = [&](const std::vector<Phrase>& set) { return match_words(words, 0, set) > 0; };
  if (at_start({{"keep", "the", "groups", "where"}})) return ClauseKind::Having;
  if (at_start(v.keep_records)) return ClauseKind::Where;
  if (at_start({{"in", "table"}})) return ClauseKind::FromJoinOn;
  if (at_start(v.sort)) return ClauseKind::OrderBy;
  if (at_start(v.group)) return ClauseKind::GroupBy;
  if (const std::size_t n = match_words(words, 0, v.ret)) return starts_limit(words, n) ? ClauseKind::OrderBy : ClauseKind::Select;

  // No cue at the start: look for one anywhere.
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (match_words(words, i, {{"keep", "the", "groups"}})) return ClauseKind::Having;
    if (match_words(words, i, {{"keep", "the", "records"}, {"filter"}, {"make", "sure"}})) return ClauseKind::Where;
    if (match_words(words, i, {{"in", "table"}})) return ClauseKind::FromJoinOn;
    if (match_words(words, i, v.sort)) return ClauseKind::OrderBy;
    if (match_words(words, i, v.group)) return ClauseKind::GroupBy;
    if (const std::size_t n = match_words(words, i, v.ret)) return starts_limit(words, i + n) ? ClauseKind::OrderBy : ClauseKind::Select;
  }
  throw GenerationError(GenerationError::Kind::Unclassifiable, "cannot tell which clause '" + std::string(text) + "' describes");
}

Clause RuleBasedGenerator::generate(std::string_view text, const GenerationContext& ctx) {
  if (!ctx.schema) throw GenerationError(GenerationError::Kind::InvalidOutput, "generation needs a schema");
  if (text::trim(text).empty()) throw GenerationError(GenerationError::Kind::Unparseable, "empty step");
  const ClauseKind kind = infer_clause_type(text);
  PhraseParser parser(tokenize(text, *ctx.schema, ctx.scope), ctx);
  return parser.parse(kind);
}

RemoteGenerator::RemoteGenerator(std::string url, std::chrono::milliseconds timeout)
    : url_(std::move(url)), timeout_(timeout) {}

Clause RemoteGenerator::generate(std::string_view text, const GenerationContext& ctx) {
  const auto scheme_end = url_.find("://");
  const auto path_start = url_.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string base = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url_.substr(path_start);

  nlohmann::json body;
  body["explanation"] = std::string(text);
  body["schema_id"] = ctx.schema ? ctx.schema->id() : "";
  std::string hint;
  try {
    hint = std::string(to_string(infer_clause_type(text)));
  } catch (const GenerationError&) {
  }
  body["clause_kind_hint"] = hint;
  auto siblings = nlohmann::json::array();
  for (const auto& s : ctx.siblings) siblings.push_back(render_clause(s, ctx.scope));
  body["sibling_sql"] = siblings;

  httplib::Client client(base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout)
      throw GenerationError(GenerationError::Kind::BackendTimeout, "clause generator timed out: " + httplib::to_string(err));
    throw GenerationError(GenerationError::Kind::BackendFailure, "clause generator unreachable: " + httplib::to_string(err));
  }
  if (res->status != 200)
    throw GenerationError(GenerationError::Kind::BackendFailure, "clause generator answered HTTP " + std::to_string(res->status));
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw GenerationError(GenerationError::Kind::InvalidOutput, "clause generator sent malformed JSON: " + res->body);
  }
  if (!reply.is_object() || !reply.contains("clause_sql") || !reply["clause_sql"].is_string())
    throw GenerationError(GenerationError::Kind::InvalidOutput, "clause generator reply lacks clause_sql: " + res->body);
  try {
    return parse_clause(reply["clause_sql"].get<std::string>(), *ctx.schema, ctx.scope);
  } catch (const Error& e) {
    throw GenerationError(GenerationError::Kind::InvalidOutput, std::string("clause generator output rejected: ") + e.what());
  }
}

void validate_clause(const Clause& clause, const GenerationContext& ctx) {
  switch (clause.kind) {
    case ClauseKind::FromJoinOn:
      if (clause.from_body().joins.empty()) throw GenerationError(GenerationError::Kind::InvalidOutput, "FROM without tables");
      for (const auto& j : clause.from_body().joins) {
        if (!ctx.schema->find_table(j.table)) throw GenerationError(GenerationError::Kind::InvalidOutput, "unknown table '" + j.table + "'");
        if (j.on) check_condition(*j.on, ctx);
      }
      break;
    case ClauseKind::Where:
    case ClauseKind::Having: check_condition(clause.filter().condition, ctx); break;
    case ClauseKind::GroupBy:
      for (const auto& v : clause.group().keys) check_column(v.column, ctx);
      break;
    case ClauseKind::Select:
      if (clause.select_body().items.empty()) throw GenerationError(GenerationError::Kind::InvalidOutput, "empty SELECT");
      for (const auto& v : clause.select_body().items) check_column(v.column, ctx);
      break;
    case ClauseKind::OrderBy:
      if (clause.order().order)
        for (const auto& v : clause.order().order->keys) check_column(v.column, ctx);
      if (clause.order().limit && *clause.order().limit <= 0)
        throw GenerationError(GenerationError::Kind::InvalidOutput, "LIMIT must be positive");
      break;
  }
}

Clause generate_clause(std::string_view text, const GenerationContext& ctx, ClauseGenerator& backend) {
  if (!ctx.schema) throw GenerationError(GenerationError::Kind::InvalidOutput, "generation needs a schema");
  Clause c = backend.generate(text, ctx);
  validate_clause(c, ctx);
  return c;
}

}  // namespace clausewise
