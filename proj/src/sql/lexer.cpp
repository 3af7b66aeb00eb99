#include "fdnl2sql/sql/lexer.hpp"

#include <cctype>

#include "fdnl2sql/sql/parser.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::sql {

bool Token::is_word(std::string_view kw) const {
  return kind == TokenKind::Word && util::iequals(text, kw);
}

namespace {

bool ident_start(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalpha(u) || c == '_' || u >= 0x80;
}

bool ident_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '$' || u >= 0x80;
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Returns the end of a quoted run starting at `i` (the opening quote), with
// doubled closing quotes treated as escapes. npos when unterminated.
std::size_t scan_quoted(std::string_view s, std::size_t i, char close, std::string* value) {
  std::size_t j = i + 1;
  while (j < s.size()) {
    if (s[j] == close) {
      if (close != ']' && j + 1 < s.size() && s[j + 1] == close) {
        if (value) value->push_back(close);
        j += 2;
        continue;
      }
      return j + 1;
    }
    if (value) value->push_back(s[j]);
    ++j;
  }
  return std::string_view::npos;
}

// Skips whitespace and comments from `i`; returns new position.
std::size_t skip_trivia(std::string_view s, std::size_t i) {
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '-') {
      auto nl = s.find('\n', i);
      i = nl == std::string_view::npos ? s.size() : nl + 1;
    } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      auto end = s.find("*/", i + 2);
      i = end == std::string_view::npos ? s.size() : end + 2;
    } else {
      break;
    }
  }
  return i;
}

}  // namespace

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto fail = [&](const std::string& msg, std::size_t at) -> void {
    throw ParseError(msg, at, out.size() + 1);
  };

  while (true) {
    i = skip_trivia(s, i);
    if (i >= s.size()) break;
    Token t;
    t.offset = i;
    char c = s[i];

    if ((c == 'x' || c == 'X') && i + 1 < s.size() && s[i + 1] == '\'') {
      auto end = scan_quoted(s, i + 1, '\'', &t.value);
      if (end == std::string_view::npos) fail("unterminated blob literal", i);
      t.kind = TokenKind::Blob;
      t.text = std::string(s.substr(i, end - i));
      i = end;
    } else if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < s.size() && ident_char(s[j])) ++j;
      t.kind = TokenKind::Word;
      t.text = std::string(s.substr(i, j - i));
      t.value = t.text;
      i = j;
    } else if (is_digit(c) || (c == '.' && i + 1 < s.size() && is_digit(s[i + 1]))) {
      std::size_t j = i;
      if (c == '0' && j + 1 < s.size() && (s[j + 1] == 'x' || s[j + 1] == 'X')) {
        j += 2;
        while (j < s.size() && std::isxdigit(static_cast<unsigned char>(s[j]))) ++j;
      } else {
        while (j < s.size() && is_digit(s[j])) ++j;
        if (j < s.size() && s[j] == '.') {
          ++j;
          while (j < s.size() && is_digit(s[j])) ++j;
        }
        if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
          std::size_t k = j + 1;
          if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
          if (k < s.size() && is_digit(s[k])) {
            j = k;
            while (j < s.size() && is_digit(s[j])) ++j;
          }
        }
      }
      if (j < s.size() && ident_start(s[j])) fail("malformed number", i);
      t.kind = TokenKind::Number;
      t.text = std::string(s.substr(i, j - i));
      t.value = t.text;
      i = j;
    } else if (c == '\'') {
      auto end = scan_quoted(s, i, '\'', &t.value);
      if (end == std::string_view::npos) fail("unterminated string literal", i);
      t.kind = TokenKind::String;
      t.text = std::string(s.substr(i, end - i));
      i = end;
    } else if (c == '"' || c == '`' || c == '[') {
      char close = c == '[' ? ']' : c;
      auto end = scan_quoted(s, i, close, &t.value);
      if (end == std::string_view::npos) fail("unterminated quoted identifier", i);
      t.kind = TokenKind::QuotedIdent;
      t.quote = c;
      t.text = std::string(s.substr(i, end - i));
      i = end;
    } else if (c == '?' || c == ':' || c == '@' || c == '$') {
      std::size_t j = i + 1;
      while (j < s.size() && ident_char(s[j])) ++j;
      if (c != '?' && j == i + 1) fail("malformed parameter", i);
      t.kind = TokenKind::Param;
      t.text = std::string(s.substr(i, j - i));
      t.value = t.text;
      i = j;
    } else {
      static constexpr std::string_view two[] = {"||", "<<", ">>", "<=", ">=", "==", "!=",
                                                 "<>", "->"};
      std::string_view op;
      for (auto cand : two) {
        if (s.substr(i, 2) == cand) {
          op = cand;
          break;
        }
      }
      if (op == "->" && s.substr(i, 3) == "->>") op = s.substr(i, 3);
      if (op.empty()) {
        static constexpr std::string_view one = "*/%+-&|<>=~(),;.";
        if (one.find(c) == std::string_view::npos) {
          fail(std::string("unexpected character '") + c + "'", i);
        }
        op = s.substr(i, 1);
      }
      t.kind = TokenKind::Op;
      t.text = std::string(op);
      t.value = t.text;
      i += op.size();
    }
    t.index = out.size();
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = TokenKind::End;
  end.offset = s.size();
  end.index = out.size();
  out.push_back(end);
  return out;
}

std::vector<std::string_view> split_statements(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  std::size_t i = 0;
  auto push = [&](std::size_t end) {
    auto piece = util::trim(s.substr(start, end - start));
    // A slice holding only comments is empty too.
    if (skip_trivia(piece, 0) < piece.size()) out.push_back(piece);
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == '\'' || c == '"' || c == '`' || c == '[') {
      auto end = scan_quoted(s, i, c == '[' ? ']' : c, nullptr);
      i = end == std::string_view::npos ? s.size() : end;
    } else if ((c == '-' && i + 1 < s.size() && s[i + 1] == '-') ||
               (c == '/' && i + 1 < s.size() && s[i + 1] == '*')) {
      i = skip_trivia(s, i);
    } else if (c == ';') {
      push(i);
      start = ++i;
    } else {
      ++i;
    }
  }
  push(s.size());
  return out;
}

}  // namespace fdnl2sql::sql
