#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "fdnl2sql/error.hpp"
#include "fdnl2sql/sql/ast.hpp"

namespace fdnl2sql::sql {

/// Syntax error at the first offending token. `token()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t offset, std::size_t token)
      : Error("parse_error", message + " (token " + std::to_string(token) + ", offset " +
                                 std::to_string(offset) + ")"),
        offset_(offset),
        token_(token) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t token() const noexcept { return token_; }

 private:
  std::size_t offset_;
  std::size_t token_;
};

class EmptyInput : public Error {
 public:
  EmptyInput() : Error("empty_input", "SQL text is empty") {}
};

/// Parses SQLite text. SELECT / WITH statements are parsed in full; other
/// statements (INSERT, DROP, PRAGMA, ...) are only classified by their verb.
/// Deterministic: the same text always yields the same structure.
SqlQuery parse_sql(std::string_view raw);

/// True for keywords that start a non-SELECT SQLite statement.
bool is_statement_verb(std::string_view word);

/// Words that cannot appear as bare identifiers.
bool is_reserved_word(std::string_view word);

}  // namespace fdnl2sql::sql
