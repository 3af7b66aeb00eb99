#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdnl2sql/sql/ast.hpp"

namespace fdnl2sql::sql {

/// Token multiset keyed by lexeme.
using TokenBag = std::map<std::string, int>;

struct ClauseTokens {
  TokenBag select_tokens;
  TokenBag where_tokens;
  TokenBag from_tokens;
};

std::size_t bag_size(const TokenBag& bag);
std::size_t bag_overlap(const TokenBag& a, const TokenBag& b);

/// Per-clause lexemes of the first statement. Clause keywords, commas,
/// parentheses, AS and ON are not tokens; qualified names ("t.k") and
/// literals are single tokens. CTE bodies and compound arms add their own
/// SELECT / FROM / WHERE lexemes to the same bags; a subquery contributes
/// every lexeme it has, keywords included, to the clause that holds it.
ClauseTokens clause_tokens(const SqlQuery& q);

/// Same tokenization applied to one expression.
std::vector<std::string> expr_tokens(const Expr& e);

/// WHERE of the first statement with literals replaced by <number> /
/// <text> / <blob>; empty when there is no WHERE.
std::string extract_where_pattern(const SqlQuery& q);

/// Flattens a top-level AND chain into its conjuncts, left to right.
std::vector<Expr> conjuncts(const Expr& e);

/// Rebuilds a left-associated AND chain; nullopt for an empty list.
std::optional<Expr> and_chain(std::vector<Expr> parts);

}  // namespace fdnl2sql::sql
