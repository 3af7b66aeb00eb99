#pragma once

#include <string>
#include <vector>

#include "fdnl2sql/schema/schema.hpp"
#include "fdnl2sql/sql/ast.hpp"

namespace fdnl2sql::sql {

struct Violation {
  /// non_read_only, multiple_statements, unknown_table, unknown_column,
  /// ambiguous_column, join_type_mismatch
  std::string code;
  std::string detail;
};

struct GuardReport {
  bool read_only = false;
  bool single_statement = false;
  bool schema_valid = false;
  bool limit_without_order_by = false;
  std::vector<Violation> violations;

  bool passes() const { return read_only && single_statement && schema_valid; }
  bool has(std::string_view code) const;
  /// Sorted distinct violation codes plus "limit_without_order_by".
  std::vector<std::string> flags() const;
};

/// Pre-execution policy check. Never throws. Statements that are not
/// SELECT/WITH are reported non-read-only and their schema use is not
/// analysed (schema_valid=false).
GuardReport guard(const SqlQuery& q, const schema::SchemaDict& schema);

}  // namespace fdnl2sql::sql
