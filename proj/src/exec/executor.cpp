#include "fdnl2sql/exec/executor.hpp"

#include <sqlite3.h>

#include <cctype>
#include <chrono>

#include "fdnl2sql/sql/render.hpp"

namespace fdnl2sql::exec {

namespace {

using SteadyClock = std::chrono::steady_clock;

int authorize(void*, int action, const char*, const char*, const char*, const char*) {
  switch (action) {
    case SQLITE_SELECT:
    case SQLITE_READ:
    case SQLITE_FUNCTION:
    case SQLITE_RECURSIVE:
      return SQLITE_OK;
    default:
      return SQLITE_DENY;
  }
}

int on_progress(void* arg) {
  auto* deadline = static_cast<SteadyClock::time_point*>(arg);
  return SteadyClock::now() >= *deadline ? 1 : 0;
}

std::string hex(const void* data, int n) {
  static const char digits[] = "0123456789ABCDEF";
  const auto* p = static_cast<const unsigned char*>(data);
  std::string out;
  out.reserve(static_cast<std::size_t>(n) * 2);
  for (int i = 0; i < n; ++i) {
    out += digits[p[i] >> 4];
    out += digits[p[i] & 0xF];
  }
  return out;
}

Cell read_cell(sqlite3_stmt* st, int i) {
  switch (sqlite3_column_type(st, i)) {
    case SQLITE_INTEGER:
      return static_cast<double>(sqlite3_column_int64(st, i));
    case SQLITE_FLOAT:
      return sqlite3_column_double(st, i);
    case SQLITE_TEXT:
      return std::string(reinterpret_cast<const char*>(sqlite3_column_text(st, i)),
                         static_cast<std::size_t>(sqlite3_column_bytes(st, i)));
    case SQLITE_BLOB:
      return hex(sqlite3_column_blob(st, i), sqlite3_column_bytes(st, i));
    default:
      return std::monostate{};
  }
}

struct Connection {
  sqlite3* db = nullptr;
  sqlite3_stmt* st = nullptr;
  ~Connection() {
    sqlite3_finalize(st);
    sqlite3_close(db);
  }
};

}  // namespace

Executor::Executor(std::string db_path, schema::SchemaDict schema)
    : db_path_(std::move(db_path)), schema_(std::move(schema)) {}

ResultTable Executor::execute(const sql::SqlQuery& q, const ExecOptions& opts) const {
  auto report = sql::guard(q, schema_);
  if (!report.passes()) throw PreconditionViolated(std::move(report));
  return run(q.statements.front().text, opts, false);
}

bool Executor::is_non_empty(const sql::SqlQuery& q, int timeout_ms) const {
  auto report = sql::guard(q, schema_);
  if (!report.passes()) throw PreconditionViolated(std::move(report));
  ExecOptions opts;
  opts.timeout_ms = timeout_ms;
  return !run(q.statements.front().text, opts, true).rows.empty();
}

std::vector<Cell> Executor::distinct_values(const std::string& table, const std::string& column,
                                            std::size_t limit) const {
  if (!schema_.find_table(table) || !schema_.find_table(table)->find(column)) {
    throw ExecutionError("no such column: " + table + "." + column);
  }
  auto col = sql::quote_identifier(column);
  std::string text = "SELECT DISTINCT " + col + " FROM " + sql::quote_identifier(table) +
                     " WHERE " + col + " IS NOT NULL ORDER BY " + col + " LIMIT " +
                     std::to_string(limit);
  ExecOptions opts;
  auto table_out = run(text, opts, false);
  std::vector<Cell> out;
  for (auto& row : table_out.rows) out.push_back(std::move(row.front()));
  return out;
}

ResultTable Executor::run(const std::string& text, const ExecOptions& opts,
                          bool first_row_only) const {
  if (audit_) audit_(text);
  Connection c;
  if (sqlite3_open_v2(db_path_.c_str(), &c.db, SQLITE_OPEN_READONLY | SQLITE_OPEN_NOMUTEX,
                      nullptr) != SQLITE_OK) {
    throw ExecutionError("cannot open database: " +
                         std::string(c.db ? sqlite3_errmsg(c.db) : db_path_));
  }
  sqlite3_set_authorizer(c.db, authorize, nullptr);

  const char* tail = nullptr;
  if (sqlite3_prepare_v2(c.db, text.c_str(), static_cast<int>(text.size()), &c.st, &tail) !=
      SQLITE_OK) {
    throw ExecutionError(sqlite3_errmsg(c.db));
  }
  if (!c.st) throw ExecutionError("empty statement");
  for (const char* p = tail; p && *p; ++p) {
    if (*p != ';' && !std::isspace(static_cast<unsigned char>(*p))) {
      throw ExecutionError("trailing statement text");
    }
  }
  if (!sqlite3_stmt_readonly(c.st)) throw ExecutionError("statement is not read-only");

  auto deadline = SteadyClock::now() + std::chrono::milliseconds(opts.timeout_ms);
  sqlite3_progress_handler(c.db, 1000, on_progress, &deadline);

  ResultTable out;
  int ncol = sqlite3_column_count(c.st);
  for (int i = 0; i < ncol; ++i) {
    const char* name = sqlite3_column_name(c.st, i);
    out.columns.push_back(name ? name : "");
  }
  while (true) {
    int rc = sqlite3_step(c.st);
    if (rc == SQLITE_DONE) break;
    if (rc == SQLITE_ROW) {
      if (out.rows.size() >= opts.row_cap) {
        out.truncated = true;
        out.row_limit_applied = opts.row_cap;
        break;
      }
      std::vector<Cell> row;
      row.reserve(static_cast<std::size_t>(ncol));
      for (int i = 0; i < ncol; ++i) row.push_back(read_cell(c.st, i));
      out.rows.push_back(std::move(row));
      if (first_row_only) break;
      continue;
    }
    if (rc == SQLITE_INTERRUPT) throw ExecutionTimeout(opts.timeout_ms);
    throw ExecutionError(sqlite3_errmsg(c.db));
  }
  return out;
}

}  // namespace fdnl2sql::exec
