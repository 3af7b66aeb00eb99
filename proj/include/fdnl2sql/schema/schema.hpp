#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fdnl2sql/error.hpp"

namespace fdnl2sql::schema {

enum class TypeGroup { Numeric, Text, Temporal };

std::string_view to_string(TypeGroup g);

/// numeric for INT/REAL/FLOA/DOUB/NUMERIC/DECIMAL/BOOL affinities, text
/// otherwise; numeric columns whose name contains year/date/month are
/// temporal.
TypeGroup type_group_for(std::string_view declared_type, std::string_view column_name);

struct ColumnInfo {
  std::string name;
  std::string declared_type;
  TypeGroup group = TypeGroup::Text;
  bool nullable = true;
};

struct TableInfo {
  std::string name;
  std::vector<ColumnInfo> columns;
  std::int64_t row_count = 0;

  /// Case-insensitive lookup; null when absent.
  const ColumnInfo* find(std::string_view column) const;
};

struct JoinCandidate {
  std::string left_table, left_column;
  std::string right_table, right_column;
};

struct SchemaDict {
  std::vector<TableInfo> tables;  // sorted by name
  std::vector<JoinCandidate> join_candidates;
  std::string fingerprint;

  const TableInfo* find_table(std::string_view name) const;
  bool empty() const { return tables.empty(); }

  /// Sorts tables, derives join candidates and the fingerprint.
  static SchemaDict build(std::vector<TableInfo> tables);
};

class DbUnreadable : public Error {
 public:
  explicit DbUnreadable(const std::string& detail) : Error("db_unreadable", detail) {}
};

/// Reads every user table of the database at `db_path` (opened read-only).
SchemaDict introspect(const std::string& db_path);

/// One line per table in name order, "name(col TYPE, ...)", followed by a
/// join-key line when candidates exist.
std::string render_schema_context(const SchemaDict& s);

}  // namespace fdnl2sql::schema
