#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fdnl2sql::sql {

/// Owning pointer with value semantics (deep copy, deep equality). Lets the
/// recursive AST be copied and edited like a plain value.
template <class T>
class Box {
 public:
  Box() = default;
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other) : ptr_(other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr;
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  explicit operator bool() const { return ptr_ != nullptr; }
  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) {
    if (!a.ptr_ || !b.ptr_) return !a.ptr_ && !b.ptr_;
    return *a.ptr_ == *b.ptr_;
  }

 private:
  std::unique_ptr<T> ptr_;
};

struct SelectStmt;

enum class ExprKind {
  Literal,
  Column,    // [qualifier.]name
  Star,      // * or qualifier.*
  Unary,     // op: "-", "+", "~", "NOT"
  Binary,    // op: "OR", "AND", "=", "!=", "<", ..., "LIKE", "NOT LIKE", "IS", "IS NOT", "||", ...
  Between,   // args: value, low, high
  In,        // args[0] value, args[1..] list items; or subquery
  Function,  // text = name, args
  Cast,      // args[0], text = type name
  Case,      // see has_base / has_else
  Exists,    // subquery
  Subquery,  // scalar subquery
  List,      // parenthesized row value
  Collate,   // args[0], text = collation
  Param,
};

enum class LiteralKind { Number, String, Null, Bool, Blob, Keyword };

/// Parser bookkeeping that takes no part in structural equality.
struct SourceHint {
  bool double_quoted = false;
  std::string original;  // identifier spelling before case folding
  friend bool operator==(const SourceHint&, const SourceHint&) { return true; }
};

struct Expr {
  ExprKind kind = ExprKind::Literal;
  std::string op;
  /// Literal: lexeme (numbers) or value (strings, unescaped). Column: name.
  /// Function: name. Cast: type. Collate: collation. Param: lexeme.
  std::string text;
  std::string qualifier;  // Column / Star table qualifier, case-folded
  LiteralKind literal = LiteralKind::Null;
  bool negated = false;   // NOT IN, NOT BETWEEN, NOT EXISTS
  bool distinct = false;  // f(DISTINCT x)
  bool has_base = false;  // CASE x WHEN ...
  bool has_else = false;
  std::vector<Expr> args;
  Box<SelectStmt> subquery;
  SourceHint hint;

  friend bool operator==(const Expr&, const Expr&);

  static Expr number(std::string lexeme);
  static Expr string(std::string value);
  static Expr null();
  static Expr column(std::string name, std::string qualifier = {});
  static Expr binary(std::string op, Expr lhs, Expr rhs);
};

struct ResultColumn {
  Expr expr;
  std::optional<std::string> alias;
  friend bool operator==(const ResultColumn&, const ResultColumn&) = default;
};

struct TableRef {
  std::string name;  // case-folded; may carry a schema prefix "main.trials"
  std::optional<std::string> alias;
  Box<SelectStmt> subquery;  // derived table when set (name empty)
  friend bool operator==(const TableRef&, const TableRef&) = default;

  /// Name by which columns of this source are qualified.
  const std::string& visible_name() const { return alias ? *alias : name; }
};

struct Join {
  std::string op;  // ",", "JOIN", "LEFT JOIN", "CROSS JOIN", "NATURAL JOIN", ...
  TableRef table;
  std::optional<Expr> on;
  std::vector<std::string> using_columns;
  friend bool operator==(const Join&, const Join&) = default;
};

struct FromClause {
  TableRef first;
  std::vector<Join> joins;
  friend bool operator==(const FromClause&, const FromClause&) = default;
};

struct SelectCore {
  bool distinct = false;
  std::vector<ResultColumn> columns;
  std::optional<FromClause> from;
  std::optional<Expr> where;
  std::vector<Expr> group_by;
  std::optional<Expr> having;
  std::vector<std::vector<Expr>> values;  // VALUES (...) core when non-empty
  friend bool operator==(const SelectCore&, const SelectCore&) = default;
};

struct CompoundPart {
  std::string op;  // UNION, UNION ALL, INTERSECT, EXCEPT
  SelectCore core;
  friend bool operator==(const CompoundPart&, const CompoundPart&) = default;
};

struct OrderTerm {
  Expr expr;
  bool descending = false;
  std::string nulls;  // "", "FIRST", "LAST"
  friend bool operator==(const OrderTerm&, const OrderTerm&) = default;
};

struct Cte {
  std::string name;
  std::vector<std::string> columns;
  Box<SelectStmt> body;
  friend bool operator==(const Cte&, const Cte&) = default;
};

struct SelectStmt {
  bool recursive = false;
  std::vector<Cte> ctes;
  SelectCore core;
  std::vector<CompoundPart> compounds;
  std::vector<OrderTerm> order_by;
  std::optional<Expr> limit;
  std::optional<Expr> offset;
  friend bool operator==(const SelectStmt&, const SelectStmt&) = default;

  bool is_compound() const { return !compounds.empty(); }
};

enum class StatementKind { Select, WithSelect, Other };

struct Statement {
  StatementKind kind = StatementKind::Other;
  std::string text;   // raw slice of the input, without the separator
  std::string verb;   // leading keyword, upper-cased
  std::optional<SelectStmt> select;
};

/// A parsed piece of SQL: every top-level statement is classified, and
/// SELECT / WITH statements carry their full structure.
struct SqlQuery {
  std::string raw;
  StatementKind kind = StatementKind::Other;
  std::vector<Statement> statements;

  std::size_t statement_count() const { return statements.size(); }
  bool is_select() const { return kind != StatementKind::Other; }
  /// Structure of the first statement; null when it is not a SELECT/WITH.
  const SelectStmt* select() const;

  const std::vector<ResultColumn>* projections() const;
  const FromClause* sources() const;
  const Expr* where() const;
  const std::vector<OrderTerm>* order_by() const;
  /// LIMIT of the first statement when it is a non-negative integer literal.
  std::optional<std::int64_t> limit() const;

  /// Structural equality: same statements with equal structures.
  bool structurally_equal(const SqlQuery& other) const;
};

/// Binding strength used by both the parser and the renderer.
int precedence(const Expr& e);

}  // namespace fdnl2sql::sql
