#pragma once

#include <string>
#include <string_view>

#include "fdnl2sql/sql/ast.hpp"

namespace fdnl2sql::sql {

struct RenderOptions {
  /// Replace literals by <number> / <text> / <blob>.
  bool placeholders = false;
};

std::string render_expr(const Expr& e, const RenderOptions& opts = {});
std::string render_select(const SelectStmt& s, const RenderOptions& opts = {});

/// Canonical text: keywords upper-cased, identifiers case-folded, single
/// spaces, string literals single-quoted, no trailing semicolon. Idempotent.
std::string normalize_sql(const SqlQuery& q);

/// Parses and normalizes in one step; throws what parse_sql throws.
std::string normalize_sql(std::string_view raw);

std::string quote_identifier(std::string_view name);
std::string quote_string(std::string_view value);

}  // namespace fdnl2sql::sql
