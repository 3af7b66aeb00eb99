#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fdnl2sql/error.hpp"
#include "fdnl2sql/schema/schema.hpp"
#include "fdnl2sql/sql/ast.hpp"
#include "fdnl2sql/sql/guard.hpp"

namespace fdnl2sql::exec {

/// null | number | text. Blobs arrive as upper-case hex text.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_null(const Cell& c) { return std::holds_alternative<std::monostate>(c); }

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  bool truncated = false;
  std::optional<std::size_t> row_limit_applied;  // the cap, when truncated
};

struct ExecOptions {
  int timeout_ms = 5000;
  std::size_t row_cap = 10000;
};

class ExecutionError : public Error {
 public:
  explicit ExecutionError(const std::string& detail) : Error("execution_error", detail) {}
};

class ExecutionTimeout : public Error {
 public:
  explicit ExecutionTimeout(int ms)
      : Error("execution_timeout", "query exceeded " + std::to_string(ms) + " ms") {}
};

class PreconditionViolated : public Error {
 public:
  explicit PreconditionViolated(sql::GuardReport report)
      : Error("precondition_violated", "guard did not pass"), report_(std::move(report)) {}
  const sql::GuardReport& report() const { return report_; }

 private:
  sql::GuardReport report_;
};

/// Read-only SQLite execution. Every call opens its own read-only
/// connection, so one Executor may be used from several threads.
class Executor {
 public:
  Executor(std::string db_path, schema::SchemaDict schema);

  /// Runs the guard first; PreconditionViolated when it does not pass.
  ResultTable execute(const sql::SqlQuery& q, const ExecOptions& opts = {}) const;
  /// True iff the query yields at least one row; stops after that row.
  bool is_non_empty(const sql::SqlQuery& q, int timeout_ms = 5000) const;

  /// Up to `limit` distinct non-null values of a column, in ascending order.
  std::vector<Cell> distinct_values(const std::string& table, const std::string& column,
                                    std::size_t limit = 50) const;

  /// Observer called with the SQL text of every statement handed to the
  /// engine.
  void set_audit(std::function<void(const std::string&)> audit) { audit_ = std::move(audit); }

  const schema::SchemaDict& schema() const { return schema_; }
  const std::string& db_path() const { return db_path_; }

 private:
  std::string db_path_;
  schema::SchemaDict schema_;
  std::function<void(const std::string&)> audit_;

  ResultTable run(const std::string& sql, const ExecOptions& opts, bool first_row_only) const;
};

}  // namespace fdnl2sql::exec
