#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fdnl2sql::sql {

enum class TokenKind {
  Word,         // bare identifier or keyword
  QuotedIdent,  // "x", `x`, [x]
  String,       // 'x'
  Number,
  Blob,         // X'ABCD'
  Param,        // ?, ?1, :name, @name, $name
  Op,           // operators and punctuation
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;   // lexeme as written
  std::string value;  // unescaped content for strings / quoted identifiers
  std::size_t offset = 0;
  std::size_t index = 0;  // 0-based position in the token stream
  char quote = 0;         // opening quote character of QuotedIdent

  bool is_op(std::string_view op) const { return kind == TokenKind::Op && text == op; }
  /// Case-insensitive keyword test; only bare words qualify.
  bool is_word(std::string_view kw) const;
};

/// Splits SQLite text into tokens, dropping whitespace and comments.
/// Throws ParseError on an unterminated literal or an unknown character.
/// The returned stream always ends with a single End token.
std::vector<Token> tokenize(std::string_view text);

/// Statement slices of `text`, split on semicolons outside literals and
/// comments. Empty slices are dropped. Tolerant: never throws.
std::vector<std::string_view> split_statements(std::string_view text);

}  // namespace fdnl2sql::sql
