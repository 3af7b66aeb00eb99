#include "fdnl2sql/sql/parser.hpp"

#include <array>
#include <string_view>

#include "fdnl2sql/sql/lexer.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::sql {

// ---------------------------------------------------------------------------
// AST helpers

bool operator==(const Expr& a, const Expr& b) {
  return a.kind == b.kind && a.op == b.op && a.text == b.text && a.qualifier == b.qualifier &&
         a.literal == b.literal && a.negated == b.negated && a.distinct == b.distinct &&
         a.has_base == b.has_base && a.has_else == b.has_else && a.args == b.args &&
         a.subquery == b.subquery;
}

Expr Expr::number(std::string lexeme) {
  Expr e;
  e.kind = ExprKind::Literal;
  e.literal = LiteralKind::Number;
  e.text = std::move(lexeme);
  return e;
}

Expr Expr::string(std::string value) {
  Expr e;
  e.kind = ExprKind::Literal;
  e.literal = LiteralKind::String;
  e.text = std::move(value);
  return e;
}

Expr Expr::null() {
  Expr e;
  e.kind = ExprKind::Literal;
  e.literal = LiteralKind::Null;
  e.text = "NULL";
  return e;
}

Expr Expr::column(std::string name, std::string qualifier) {
  Expr e;
  e.kind = ExprKind::Column;
  e.text = std::move(name);
  e.qualifier = std::move(qualifier);
  return e;
}

Expr Expr::binary(std::string op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.op = std::move(op);
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  return e;
}

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Binary: {
      const auto& op = e.op;
      if (op == "OR") return 1;
      if (op == "AND") return 2;
      if (op == "<" || op == "<=" || op == ">" || op == ">=") return 5;
      if (op == "&" || op == "|" || op == "<<" || op == ">>") return 6;
      if (op == "+" || op == "-") return 7;
      if (op == "*" || op == "/" || op == "%") return 8;
      if (op == "||" || op == "->" || op == "->>") return 9;
      return 4;  // =, !=, IS, IS NOT, LIKE, GLOB, REGEXP, MATCH and negations
    }
    case ExprKind::Unary:
      return e.op == "NOT" ? 3 : 10;
    case ExprKind::Between:
    case ExprKind::In:
      return 4;
    case ExprKind::Collate:
      return 11;
    default:
      return 12;
  }
}

const SelectStmt* SqlQuery::select() const {
  if (statements.empty() || !statements.front().select) return nullptr;
  return &*statements.front().select;
}

const std::vector<ResultColumn>* SqlQuery::projections() const {
  auto* s = select();
  return s ? &s->core.columns : nullptr;
}

const FromClause* SqlQuery::sources() const {
  auto* s = select();
  return s && s->core.from ? &*s->core.from : nullptr;
}

const Expr* SqlQuery::where() const {
  auto* s = select();
  return s && s->core.where ? &*s->core.where : nullptr;
}

const std::vector<OrderTerm>* SqlQuery::order_by() const {
  auto* s = select();
  return s ? &s->order_by : nullptr;
}

std::optional<std::int64_t> SqlQuery::limit() const {
  auto* s = select();
  if (!s || !s->limit) return std::nullopt;
  const auto& e = *s->limit;
  if (e.kind != ExprKind::Literal || e.literal != LiteralKind::Number) return std::nullopt;
  for (char c : e.text) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  try {
    return std::stoll(e.text);
  } catch (...) {
    return std::nullopt;
  }
}

bool SqlQuery::structurally_equal(const SqlQuery& other) const {
  if (kind != other.kind || statements.size() != other.statements.size()) return false;
  for (std::size_t i = 0; i < statements.size(); ++i) {
    const auto& a = statements[i];
    const auto& b = other.statements[i];
    if (a.kind != b.kind || a.verb != b.verb || a.select != b.select) return false;
    if (!a.select && util::collapse_whitespace(util::to_lower(a.text)) !=
                         util::collapse_whitespace(util::to_lower(b.text)))
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

constexpr std::array kReserved = {
    "ALL",       "ALTER",     "AND",       "AS",       "ASC",      "ATTACH",  "BEGIN",
    "BETWEEN",   "BY",        "CASE",      "CAST",     "COLLATE",  "COMMIT",  "CREATE",
    "CROSS",     "DELETE",    "DESC",      "DETACH",   "DISTINCT", "DROP",    "ELSE",
    "END",       "ESCAPE",    "EXCEPT",    "EXISTS",   "FROM",     "FULL",    "GLOB",
    "GROUP",     "HAVING",    "IN",        "INNER",    "INSERT",   "INTERSECT", "INTO",
    "IS",        "ISNULL",    "JOIN",      "LEFT",     "LIKE",     "LIMIT",   "MATCH",
    "NATURAL",   "NOT",       "NOTNULL",   "NULL",     "OFFSET",   "ON",      "OR",
    "ORDER",     "OUTER",     "PRAGMA",    "REGEXP",   "RIGHT",    "ROLLBACK", "SELECT",
    "SET",       "THEN",      "UNION",     "UPDATE",   "USING",    "VACUUM",  "VALUES",
    "WHEN",      "WHERE",     "WINDOW",    "WITH",     "OVER",     "FILTER",  "RECURSIVE",
    "NULLS",     "INDEXED",
};

constexpr std::array kStatementVerbs = {
    "INSERT", "UPDATE", "DELETE",  "REPLACE", "DROP",     "CREATE",  "ALTER",
    "ATTACH", "DETACH", "PRAGMA",  "VACUUM",  "REINDEX",  "ANALYZE", "BEGIN",
    "COMMIT", "END",    "ROLLBACK", "SAVEPOINT", "RELEASE", "EXPLAIN",
};

bool is_reserved(std::string_view w) {
  for (auto r : kReserved) {
    if (util::iequals(w, r)) return true;
  }
  return false;
}

class Parser {
 public:
  Parser(const std::vector<Token>& toks, std::size_t begin, std::size_t end)
      : toks_(toks), pos_(begin), end_(end) {}

  SelectStmt select_stmt() {
    SelectStmt s;
    if (accept_word("WITH")) {
      s.recursive = accept_word("RECURSIVE");
      do {
        s.ctes.push_back(cte());
      } while (accept_op(","));
    }
    select_body(s);
    return s;
  }

  // After a WITH prefix, the body may be something other than SELECT; the
  // caller checks this before committing to a SELECT parse.
  std::vector<Cte> with_prefix(bool& recursive) {
    std::vector<Cte> ctes;
    expect_word("WITH");
    recursive = accept_word("RECURSIVE");
    do {
      ctes.push_back(cte());
    } while (accept_op(","));
    return ctes;
  }

  void select_body(SelectStmt& s) {
    s.core = core();
    while (true) {
      std::string op;
      if (accept_word("UNION")) {
        op = accept_word("ALL") ? "UNION ALL" : "UNION";
      } else if (accept_word("INTERSECT")) {
        op = "INTERSECT";
      } else if (accept_word("EXCEPT")) {
        op = "EXCEPT";
      } else {
        break;
      }
      s.compounds.push_back({op, core()});
    }
    if (accept_word("ORDER")) {
      expect_word("BY");
      do {
        OrderTerm t;
        t.expr = expr();
        if (accept_word("DESC")) {
          t.descending = true;
        } else {
          accept_word("ASC");
        }
        if (accept_word("NULLS")) {
          if (accept_word("FIRST")) {
            t.nulls = "FIRST";
          } else {
            expect_word("LAST");
            t.nulls = "LAST";
          }
        }
        s.order_by.push_back(std::move(t));
      } while (accept_op(","));
    }
    if (accept_word("LIMIT")) {
      auto first = expr();
      if (accept_word("OFFSET")) {
        s.limit = std::move(first);
        s.offset = expr();
      } else if (accept_op(",")) {
        s.offset = std::move(first);
        s.limit = expr();
      } else {
        s.limit = std::move(first);
      }
    }
  }

  const Token& peek(std::size_t ahead = 0) const {
    auto i = pos_ + ahead;
    return i < end_ ? toks_[i] : toks_[end_];
  }

  bool at_end() const { return pos_ >= end_; }

  [[noreturn]] void fail(const std::string& msg) const {
    const auto& t = peek();
    throw ParseError(msg, t.offset, t.index + 1);
  }

  [[noreturn]] void unexpected() const {
    const auto& t = peek();
    if (t.kind == TokenKind::End || pos_ >= end_) fail("unexpected end of statement");
    fail("unexpected token '" + t.text + "'");
  }

 private:
  const std::vector<Token>& toks_;
  std::size_t pos_;
  std::size_t end_;

  const Token& next() {
    const auto& t = peek();
    if (pos_ < end_) ++pos_;
    return t;
  }

  bool accept_word(std::string_view kw) {
    if (!at_end() && peek().is_word(kw)) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool accept_op(std::string_view op) {
    if (!at_end() && peek().is_op(op)) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect_word(std::string_view kw) {
    if (!accept_word(kw)) fail("expected " + std::string(kw));
  }

  void expect_op(std::string_view op) {
    if (!accept_op(op)) fail("expected '" + std::string(op) + "'");
  }

  bool at_select_start() const {
    return !at_end() &&
           (peek().is_word("SELECT") || peek().is_word("WITH") || peek().is_word("VALUES"));
  }

  // Bare words that are not reserved, and quoted identifiers.
  bool at_identifier() const {
    if (at_end()) return false;
    const auto& t = peek();
    return t.kind == TokenKind::QuotedIdent || (t.kind == TokenKind::Word && !is_reserved(t.text));
  }

  std::string identifier() {
    if (!at_identifier()) fail("expected identifier");
    const auto& t = next();
    return util::to_lower(t.kind == TokenKind::QuotedIdent ? t.value : t.text);
  }

  Cte cte() {
    Cte c;
    c.name = identifier();
    if (accept_op("(")) {
      do {
        c.columns.push_back(identifier());
      } while (accept_op(","));
      expect_op(")");
    }
    expect_word("AS");
    if (accept_word("NOT")) {
      expect_word("MATERIALIZED");
    } else {
      accept_word("MATERIALIZED");
    }
    expect_op("(");
    c.body = select_stmt();
    expect_op(")");
    return c;
  }

  SelectCore core() {
    SelectCore c;
    if (accept_word("VALUES")) {
      do {
        expect_op("(");
        std::vector<Expr> row;
        do {
          row.push_back(expr());
        } while (accept_op(","));
        expect_op(")");
        c.values.push_back(std::move(row));
      } while (accept_op(","));
      return c;
    }
    expect_word("SELECT");
    if (accept_word("DISTINCT")) {
      c.distinct = true;
    } else {
      accept_word("ALL");
    }
    do {
      c.columns.push_back(result_column());
    } while (accept_op(","));
    if (accept_word("FROM")) c.from = from_clause();
    if (accept_word("WHERE")) c.where = expr();
    if (accept_word("GROUP")) {
      expect_word("BY");
      do {
        c.group_by.push_back(expr());
      } while (accept_op(","));
      if (accept_word("HAVING")) c.having = expr();
    } else if (accept_word("HAVING")) {
      c.having = expr();
    }
    if (!at_end() && peek().is_word("WINDOW")) fail("WINDOW clauses are not supported");
    return c;
  }

  std::optional<std::string> alias() {
    if (accept_word("AS")) {
      if (!at_end() && peek().kind == TokenKind::String) return util::to_lower(next().value);
      return identifier();
    }
    if (at_identifier()) return identifier();
    if (!at_end() && peek().kind == TokenKind::String) return util::to_lower(next().value);
    return std::nullopt;
  }

  ResultColumn result_column() {
    ResultColumn rc;
    if (accept_op("*")) {
      rc.expr.kind = ExprKind::Star;
      return rc;
    }
    if (at_identifier() && peek(1).is_op(".") && peek(2).is_op("*")) {
      rc.expr.kind = ExprKind::Star;
      rc.expr.qualifier = identifier();
      next();
      next();
      return rc;
    }
    rc.expr = expr();
    rc.alias = alias();
    return rc;
  }

  TableRef table_ref() {
    TableRef t;
    if (accept_op("(")) {
      if (!at_select_start()) fail("parenthesized join sources are not supported");
      t.subquery = select_stmt();
      expect_op(")");
      t.alias = alias();
      return t;
    }
    t.name = identifier();
    if (accept_op(".")) t.name += "." + identifier();
    if (!at_end() && peek().is_op("(")) fail("table-valued functions are not supported");
    t.alias = alias();
    if (accept_word("INDEXED")) {
      expect_word("BY");
      identifier();
    } else if (!at_end() && peek().is_word("NOT") && peek(1).is_word("INDEXED")) {
      next();
      next();
    }
    return t;
  }

  std::optional<std::string> join_operator() {
    if (accept_op(",")) return std::string(",");
    std::string op;
    auto add = [&](const char* w) {
      if (!op.empty()) op += ' ';
      op += w;
    };
    if (accept_word("NATURAL")) add("NATURAL");
    if (accept_word("LEFT")) {
      add("LEFT");
      if (accept_word("OUTER")) add("OUTER");
    } else if (accept_word("RIGHT")) {
      add("RIGHT");
      if (accept_word("OUTER")) add("OUTER");
    } else if (accept_word("FULL")) {
      add("FULL");
      if (accept_word("OUTER")) add("OUTER");
    } else if (accept_word("INNER")) {
      add("INNER");
    } else if (accept_word("CROSS")) {
      add("CROSS");
    }
    if (accept_word("JOIN")) {
      add("JOIN");
      return op;
    }
    if (!op.empty()) fail("expected JOIN");
    return std::nullopt;
  }

  FromClause from_clause() {
    FromClause f;
    f.first = table_ref();
    while (auto op = join_operator()) {
      Join j;
      j.op = *op;
      j.table = table_ref();
      if (accept_word("ON")) {
        j.on = expr();
      } else if (accept_word("USING")) {
        expect_op("(");
        do {
          j.using_columns.push_back(identifier());
        } while (accept_op(","));
        expect_op(")");
      }
      f.joins.push_back(std::move(j));
    }
    return f;
  }

  // --- expressions -------------------------------------------------------

 public:
  Expr expr() { return or_expr(); }

 private:
  Expr or_expr() {
    auto lhs = and_expr();
    while (accept_word("OR")) lhs = Expr::binary("OR", std::move(lhs), and_expr());
    return lhs;
  }

  Expr and_expr() {
    auto lhs = not_expr();
    while (accept_word("AND")) lhs = Expr::binary("AND", std::move(lhs), not_expr());
    return lhs;
  }

  Expr not_expr() {
    if (accept_word("NOT")) {
      Expr e;
      e.kind = ExprKind::Unary;
      e.op = "NOT";
      e.args.push_back(not_expr());
      return e;
    }
    return equality();
  }

  // A double-quoted token on the value side of a predicate is read as a
  // string literal, which is how SQLite resolves it when no such column
  // exists and how generated SQL nearly always intends it.
  static void coerce_value(const Expr& lhs, Expr& rhs) {
    if (lhs.kind == ExprKind::Column && rhs.kind == ExprKind::Column && rhs.hint.double_quoted &&
        rhs.qualifier.empty()) {
      auto value = rhs.hint.original;
      rhs = Expr::string(std::move(value));
    }
  }

  Expr equality() {
    auto lhs = comparison();
    while (!at_end()) {
      const auto& t = peek();
      if (t.is_op("=") || t.is_op("==") || t.is_op("!=") || t.is_op("<>")) {
        next();
        std::string op = (t.text == "==") ? "=" : (t.text == "<>" ? "!=" : t.text);
        auto rhs = comparison();
        coerce_value(lhs, rhs);
        lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
        continue;
      }
      if (t.is_word("IS")) {
        next();
        bool neg = accept_word("NOT");
        if (accept_word("DISTINCT")) {
          expect_word("FROM");
          neg = !neg;
        }
        auto rhs = comparison();
        coerce_value(lhs, rhs);
        lhs = Expr::binary(neg ? "IS NOT" : "IS", std::move(lhs), std::move(rhs));
        continue;
      }
      if (t.is_word("ISNULL")) {
        next();
        lhs = Expr::binary("IS", std::move(lhs), Expr::null());
        continue;
      }
      if (t.is_word("NOTNULL")) {
        next();
        lhs = Expr::binary("IS NOT", std::move(lhs), Expr::null());
        continue;
      }
      bool neg = false;
      if (t.is_word("NOT")) {
        const auto& n = peek(1);
        if (n.is_word("NULL")) {
          next();
          next();
          lhs = Expr::binary("IS NOT", std::move(lhs), Expr::null());
          continue;
        }
        if (!(n.is_word("IN") || n.is_word("LIKE") || n.is_word("GLOB") || n.is_word("REGEXP") ||
              n.is_word("MATCH") || n.is_word("BETWEEN")))
          break;
        next();
        neg = true;
      }
      const auto& k = peek();
      if (k.is_word("IN")) {
        next();
        lhs = in_expr(std::move(lhs), neg);
        continue;
      }
      if (k.is_word("LIKE") || k.is_word("GLOB") || k.is_word("REGEXP") || k.is_word("MATCH")) {
        std::string op = util::to_upper(next().text);
        auto rhs = comparison();
        coerce_value(lhs, rhs);
        auto e = Expr::binary(neg ? "NOT " + op : op, std::move(lhs), std::move(rhs));
        if (accept_word("ESCAPE")) e.args.push_back(comparison());
        lhs = std::move(e);
        continue;
      }
      if (k.is_word("BETWEEN")) {
        next();
        Expr e;
        e.kind = ExprKind::Between;
        e.negated = neg;
        auto lo = comparison();
        expect_word("AND");
        auto hi = comparison();
        coerce_value(lhs, lo);
        coerce_value(lhs, hi);
        e.args.push_back(std::move(lhs));
        e.args.push_back(std::move(lo));
        e.args.push_back(std::move(hi));
        lhs = std::move(e);
        continue;
      }
      if (neg) unexpected();
      break;
    }
    return lhs;
  }

  Expr in_expr(Expr lhs, bool neg) {
    Expr e;
    e.kind = ExprKind::In;
    e.negated = neg;
    expect_op("(");
    if (at_select_start()) {
      e.subquery = select_stmt();
      e.args.push_back(std::move(lhs));
      expect_op(")");
      return e;
    }
    e.args.push_back(std::move(lhs));
    if (!accept_op(")")) {
      do {
        auto item = expr();
        coerce_value(e.args.front(), item);
        e.args.push_back(std::move(item));
      } while (accept_op(","));
      expect_op(")");
    }
    return e;
  }

  Expr comparison() {
    auto lhs = bitwise();
    while (!at_end()) {
      const auto& t = peek();
      if (t.is_op("<") || t.is_op("<=") || t.is_op(">") || t.is_op(">=")) {
        std::string op = next().text;
        auto rhs = bitwise();
        coerce_value(lhs, rhs);
        lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
      } else {
        break;
      }
    }
    return lhs;
  }

  Expr bitwise() {
    auto lhs = additive();
    while (!at_end()) {
      const auto& t = peek();
      if (t.is_op("&") || t.is_op("|") || t.is_op("<<") || t.is_op(">>")) {
        std::string op = next().text;
        lhs = Expr::binary(op, std::move(lhs), additive());
      } else {
        break;
      }
    }
    return lhs;
  }

  Expr additive() {
    auto lhs = multiplicative();
    while (!at_end() && (peek().is_op("+") || peek().is_op("-"))) {
      std::string op = next().text;
      lhs = Expr::binary(op, std::move(lhs), multiplicative());
    }
    return lhs;
  }

  Expr multiplicative() {
    auto lhs = concat();
    while (!at_end() && (peek().is_op("*") || peek().is_op("/") || peek().is_op("%"))) {
      std::string op = next().text;
      lhs = Expr::binary(op, std::move(lhs), concat());
    }
    return lhs;
  }

  Expr concat() {
    auto lhs = unary();
    while (!at_end() && (peek().is_op("||") || peek().is_op("->") || peek().is_op("->>"))) {
      std::string op = next().text;
      lhs = Expr::binary(op, std::move(lhs), unary());
    }
    return lhs;
  }

  Expr unary() {
    if (!at_end() && peek().is_op("-") && peek(1).kind == TokenKind::Number && pos_ + 1 < end_) {
      next();
      auto lit = Expr::number("-" + next().text);
      return postfix(std::move(lit));
    }
    if (!at_end() && (peek().is_op("-") || peek().is_op("+") || peek().is_op("~"))) {
      Expr e;
      e.kind = ExprKind::Unary;
      e.op = next().text;
      e.args.push_back(unary());
      return e;
    }
    return postfix(primary());
  }

  Expr postfix(Expr e) {
    while (accept_word("COLLATE")) {
      Expr c;
      c.kind = ExprKind::Collate;
      c.text = util::to_upper(identifier());
      c.args.push_back(std::move(e));
      e = std::move(c);
    }
    return e;
  }

  std::string type_name() {
    std::string name;
    while (!at_end() && peek().kind == TokenKind::Word && !peek().is_word("AS") &&
           !is_reserved(peek().text)) {
      if (!name.empty()) name += ' ';
      name += util::to_upper(next().text);
    }
    if (name.empty()) fail("expected type name");
    if (accept_op("(")) {
      name += '(';
      do {
        if (!at_end() && peek().is_op("-")) name += next().text;
        if (at_end() || peek().kind != TokenKind::Number) fail("expected number");
        name += next().text;
        if (!at_end() && peek().is_op(",")) name += ',';
      } while (accept_op(","));
      expect_op(")");
      name += ')';
    }
    return name;
  }

  Expr primary() {
    if (at_end()) unexpected();
    const auto& t = peek();
    switch (t.kind) {
      case TokenKind::Number:
        next();
        return Expr::number(t.text);
      case TokenKind::String:
        next();
        return Expr::string(t.value);
      case TokenKind::Blob: {
        next();
        Expr e;
        e.kind = ExprKind::Literal;
        e.literal = LiteralKind::Blob;
        e.text = util::to_upper(t.value);
        return e;
      }
      case TokenKind::Param: {
        next();
        Expr e;
        e.kind = ExprKind::Param;
        e.text = t.text;
        return e;
      }
      case TokenKind::Op:
        if (t.is_op("(")) return parenthesized();
        unexpected();
      case TokenKind::End:
        unexpected();
      case TokenKind::QuotedIdent:
      case TokenKind::Word:
        break;
    }

    if (t.kind == TokenKind::Word) {
      if (t.is_word("NULL")) {
        next();
        return Expr::null();
      }
      if (t.is_word("TRUE") || t.is_word("FALSE")) {
        next();
        Expr e;
        e.kind = ExprKind::Literal;
        e.literal = LiteralKind::Bool;
        e.text = util::to_upper(t.text);
        return e;
      }
      if (t.is_word("CURRENT_DATE") || t.is_word("CURRENT_TIME") ||
          t.is_word("CURRENT_TIMESTAMP")) {
        next();
        Expr e;
        e.kind = ExprKind::Literal;
        e.literal = LiteralKind::Keyword;
        e.text = util::to_upper(t.text);
        return e;
      }
      if (t.is_word("CAST")) {
        next();
        expect_op("(");
        Expr e;
        e.kind = ExprKind::Cast;
        e.args.push_back(expr());
        expect_word("AS");
        e.text = type_name();
        expect_op(")");
        return e;
      }
      if (t.is_word("CASE")) return case_expr();
      if (t.is_word("EXISTS")) {
        next();
        expect_op("(");
        Expr e;
        e.kind = ExprKind::Exists;
        e.subquery = select_stmt();
        expect_op(")");
        return e;
      }
      if (t.is_word("RAISE")) fail("RAISE is not supported");
    }

    // Function call or column reference.
    if (peek(1).is_op("(") && t.kind == TokenKind::Word &&
        !(is_reserved(t.text) && !t.is_word("REPLACE"))) {
      next();
      next();
      Expr e;
      e.kind = ExprKind::Function;
      e.text = util::to_lower(t.text);
      if (accept_op("*")) {
        Expr star;
        star.kind = ExprKind::Star;
        e.args.push_back(std::move(star));
      } else if (!(!at_end() && peek().is_op(")"))) {
        e.distinct = accept_word("DISTINCT");
        do {
          e.args.push_back(expr());
        } while (accept_op(","));
      }
      expect_op(")");
      if (!at_end() && (peek().is_word("OVER") || peek().is_word("FILTER")))
        fail("window functions are not supported");
      return e;
    }

    if (!at_identifier()) unexpected();
    bool dq = t.kind == TokenKind::QuotedIdent && t.quote == '"';
    std::string original = t.kind == TokenKind::QuotedIdent ? t.value : t.text;
    auto first = identifier();
    if (accept_op(".")) {
      auto second = identifier();
      if (accept_op(".")) {
        auto third = identifier();
        return Expr::column(third, first + "." + second);
      }
      return Expr::column(second, first);
    }
    auto col = Expr::column(first);
    col.hint.double_quoted = dq;
    col.hint.original = original;
    return col;
  }

  Expr parenthesized() {
    expect_op("(");
    if (at_select_start()) {
      Expr e;
      e.kind = ExprKind::Subquery;
      e.subquery = select_stmt();
      expect_op(")");
      return e;
    }
    std::vector<Expr> items;
    do {
      items.push_back(expr());
    } while (accept_op(","));
    expect_op(")");
    if (items.size() == 1) return std::move(items.front());
    Expr e;
    e.kind = ExprKind::List;
    e.args = std::move(items);
    return e;
  }

  Expr case_expr() {
    expect_word("CASE");
    Expr e;
    e.kind = ExprKind::Case;
    if (!(!at_end() && peek().is_word("WHEN"))) {
      e.has_base = true;
      e.args.push_back(expr());
    }
    if (!(!at_end() && peek().is_word("WHEN"))) fail("expected WHEN");
    while (accept_word("WHEN")) {
      e.args.push_back(expr());
      expect_word("THEN");
      e.args.push_back(expr());
    }
    if (accept_word("ELSE")) {
      e.has_else = true;
      e.args.push_back(expr());
    }
    expect_word("END");
    return e;
  }
};

Statement parse_statement(std::string_view raw, const std::vector<Token>& toks, std::size_t begin,
                          std::size_t end) {
  Statement st;
  const auto& first = toks[begin];
  std::size_t stop = end < toks.size() ? toks[end].offset : raw.size();
  st.text = std::string(util::trim(raw.substr(first.offset, stop - first.offset)));

  Parser p(toks, begin, end);
  if (first.is_word("SELECT") || first.is_word("VALUES")) {
    st.kind = StatementKind::Select;
    st.verb = "SELECT";
    st.select = p.select_stmt();
  } else if (first.is_word("WITH")) {
    st.verb = "WITH";
    SelectStmt s;
    s.ctes = p.with_prefix(s.recursive);
    const auto& body = p.peek();
    if (!p.at_end() && (body.is_word("SELECT") || body.is_word("VALUES"))) {
      st.kind = StatementKind::WithSelect;
      p.select_body(s);
      st.select = std::move(s);
    } else if (!p.at_end() && body.kind == TokenKind::Word && is_statement_verb(body.text)) {
      // WITH ... INSERT/UPDATE/DELETE: classified, not parsed further.
      st.kind = StatementKind::Other;
      st.verb = util::to_upper(body.text);
      return st;
    } else {
      p.unexpected();
    }
  } else if (first.kind == TokenKind::Word && is_statement_verb(first.text)) {
    st.kind = StatementKind::Other;
    st.verb = util::to_upper(first.text);
    return st;
  } else {
    p.fail("expected a statement, found '" + first.text + "'");
  }
  if (!p.at_end()) p.unexpected();
  return st;
}

}  // namespace

bool is_reserved_word(std::string_view word) { return is_reserved(word); }

bool is_statement_verb(std::string_view word) {
  for (auto v : kStatementVerbs) {
    if (util::iequals(word, v)) return true;
  }
  return false;
}

SqlQuery parse_sql(std::string_view raw) {
  auto toks = tokenize(raw);
  SqlQuery q;
  q.raw = std::string(raw);

  std::size_t begin = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    bool sep = toks[i].is_op(";");
    bool last = toks[i].kind == TokenKind::End;
    if (!sep && !last) continue;
    if (i > begin) q.statements.push_back(parse_statement(raw, toks, begin, i));
    begin = i + 1;
  }
  if (q.statements.empty()) throw EmptyInput();

  q.kind = q.statements.front().kind;
  for (const auto& st : q.statements) {
    if (st.kind == StatementKind::Other) q.kind = StatementKind::Other;
  }
  return q;
}

}  // namespace fdnl2sql::sql
