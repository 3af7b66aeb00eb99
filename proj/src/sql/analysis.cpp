#include "fdnl2sql/sql/analysis.hpp"

#include <sstream>

#include "fdnl2sql/sql/render.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::sql {

namespace {

void add_words(std::vector<std::string>& out, std::string_view words) {
  std::istringstream in{std::string(words)};
  std::string w;
  while (in >> w) out.push_back(util::to_lower(w));
}

std::string dotted(const std::string& qualifier, const std::string& name) {
  return qualifier.empty() ? name : qualifier + "." + name;
}

void emit_select(const SelectStmt& s, std::vector<std::string>& out);

void emit_expr(const Expr& e, std::vector<std::string>& out) {
  switch (e.kind) {
    case ExprKind::Literal:
      switch (e.literal) {
        case LiteralKind::String:
          out.push_back(quote_string(e.text));
          break;
        case LiteralKind::Blob:
          out.push_back("x'" + e.text + "'");
          break;
        case LiteralKind::Number:
          out.push_back(e.text);
          break;
        case LiteralKind::Null:
          out.push_back("null");
          break;
        case LiteralKind::Bool:
        case LiteralKind::Keyword:
          out.push_back(util::to_lower(e.text));
          break;
      }
      break;
    case ExprKind::Column:
      out.push_back(dotted(e.qualifier, e.text));
      break;
    case ExprKind::Star:
      out.push_back(dotted(e.qualifier, "*"));
      break;
    case ExprKind::Param:
      out.push_back(e.text);
      break;
    case ExprKind::Unary:
      add_words(out, e.op);
      emit_expr(e.args[0], out);
      break;
    case ExprKind::Binary:
      emit_expr(e.args[0], out);
      add_words(out, e.op);
      emit_expr(e.args[1], out);
      if (e.args.size() > 2) {
        out.push_back("escape");
        emit_expr(e.args[2], out);
      }
      break;
    case ExprKind::Between:
      emit_expr(e.args[0], out);
      if (e.negated) out.push_back("not");
      out.push_back("between");
      emit_expr(e.args[1], out);
      out.push_back("and");
      emit_expr(e.args[2], out);
      break;
    case ExprKind::In:
      emit_expr(e.args[0], out);
      if (e.negated) out.push_back("not");
      out.push_back("in");
      if (e.subquery) emit_select(*e.subquery, out);
      for (std::size_t i = 1; i < e.args.size(); ++i) emit_expr(e.args[i], out);
      break;
    case ExprKind::Function:
      out.push_back(e.text);
      if (e.distinct) out.push_back("distinct");
      for (const auto& a : e.args) emit_expr(a, out);
      break;
    case ExprKind::Cast:
      out.push_back("cast");
      emit_expr(e.args[0], out);
      add_words(out, e.text);
      break;
    case ExprKind::Case: {
      out.push_back("case");
      std::size_t i = 0;
      if (e.has_base) emit_expr(e.args[i++], out);
      std::size_t pairs_end = e.args.size() - (e.has_else ? 1 : 0);
      for (; i + 2 <= pairs_end; i += 2) {
        out.push_back("when");
        emit_expr(e.args[i], out);
        out.push_back("then");
        emit_expr(e.args[i + 1], out);
      }
      if (e.has_else) {
        out.push_back("else");
        emit_expr(e.args.back(), out);
      }
      out.push_back("end");
      break;
    }
    case ExprKind::Exists:
      if (e.negated) out.push_back("not");
      out.push_back("exists");
      emit_select(*e.subquery, out);
      break;
    case ExprKind::Subquery:
      emit_select(*e.subquery, out);
      break;
    case ExprKind::List:
      for (const auto& a : e.args) emit_expr(a, out);
      break;
    case ExprKind::Collate:
      emit_expr(e.args[0], out);
      out.push_back("collate");
      out.push_back(util::to_lower(e.text));
      break;
  }
}

void emit_table(const TableRef& t, std::vector<std::string>& out) {
  if (t.subquery) {
    emit_select(*t.subquery, out);
  } else {
    out.push_back(t.name);
  }
  if (t.alias) out.push_back(*t.alias);
}

void emit_from(const FromClause& f, std::vector<std::string>& out) {
  emit_table(f.first, out);
  for (const auto& j : f.joins) {
    if (j.op != ",") add_words(out, j.op);
    emit_table(j.table, out);
    if (j.on) emit_expr(*j.on, out);
    if (!j.using_columns.empty()) {
      out.push_back("using");
      for (const auto& c : j.using_columns) out.push_back(c);
    }
  }
}

void emit_projection(const SelectCore& c, std::vector<std::string>& out) {
  if (!c.values.empty()) {
    for (const auto& row : c.values) {
      for (const auto& v : row) emit_expr(v, out);
    }
    return;
  }
  if (c.distinct) out.push_back("distinct");
  for (const auto& col : c.columns) {
    emit_expr(col.expr, out);
    if (col.alias) out.push_back(*col.alias);
  }
}

void emit_core(const SelectCore& c, std::vector<std::string>& out) {
  out.push_back(c.values.empty() ? "select" : "values");
  emit_projection(c, out);
  if (c.from) {
    out.push_back("from");
    emit_from(*c.from, out);
  }
  if (c.where) {
    out.push_back("where");
    emit_expr(*c.where, out);
  }
  if (!c.group_by.empty()) {
    out.push_back("group");
    out.push_back("by");
    for (const auto& g : c.group_by) emit_expr(g, out);
  }
  if (c.having) {
    out.push_back("having");
    emit_expr(*c.having, out);
  }
}

void emit_select(const SelectStmt& s, std::vector<std::string>& out) {
  if (!s.ctes.empty()) {
    out.push_back("with");
    if (s.recursive) out.push_back("recursive");
    for (const auto& cte : s.ctes) {
      out.push_back(cte.name);
      for (const auto& c : cte.columns) out.push_back(c);
      emit_select(*cte.body, out);
    }
  }
  emit_core(s.core, out);
  for (const auto& part : s.compounds) {
    add_words(out, part.op);
    emit_core(part.core, out);
  }
  if (!s.order_by.empty()) {
    out.push_back("order");
    out.push_back("by");
    for (const auto& t : s.order_by) {
      emit_expr(t.expr, out);
      if (t.descending) out.push_back("desc");
      if (!t.nulls.empty()) {
        out.push_back("nulls");
        out.push_back(util::to_lower(t.nulls));
      }
    }
  }
  if (s.limit) {
    out.push_back("limit");
    emit_expr(*s.limit, out);
    if (s.offset) {
      out.push_back("offset");
      emit_expr(*s.offset, out);
    }
  }
}

void add_all(TokenBag& bag, const std::vector<std::string>& toks) {
  for (const auto& t : toks) ++bag[t];
}

void collect_core(const SelectCore& c, ClauseTokens& out) {
  std::vector<std::string> sel, from, where;
  emit_projection(c, sel);
  if (c.from) emit_from(*c.from, from);
  if (c.where) emit_expr(*c.where, where);
  add_all(out.select_tokens, sel);
  add_all(out.from_tokens, from);
  add_all(out.where_tokens, where);
}

void collect_select(const SelectStmt& s, ClauseTokens& out) {
  for (const auto& cte : s.ctes) collect_select(*cte.body, out);
  collect_core(s.core, out);
  for (const auto& part : s.compounds) collect_core(part.core, out);
}

}  // namespace

std::size_t bag_size(const TokenBag& bag) {
  std::size_t n = 0;
  for (const auto& [tok, count] : bag) n += static_cast<std::size_t>(count);
  return n;
}

std::size_t bag_overlap(const TokenBag& a, const TokenBag& b) {
  std::size_t n = 0;
  for (const auto& [tok, count] : a) {
    auto it = b.find(tok);
    if (it != b.end()) n += static_cast<std::size_t>(std::min(count, it->second));
  }
  return n;
}

ClauseTokens clause_tokens(const SqlQuery& q) {
  ClauseTokens out;
  if (const auto* s = q.select()) collect_select(*s, out);
  return out;
}

std::vector<std::string> expr_tokens(const Expr& e) {
  std::vector<std::string> out;
  emit_expr(e, out);
  return out;
}

std::string extract_where_pattern(const SqlQuery& q) {
  const auto* w = q.where();
  if (!w) return {};
  RenderOptions opts;
  opts.placeholders = true;
  return render_expr(*w, opts);
}

std::vector<Expr> conjuncts(const Expr& e) {
  if (e.kind == ExprKind::Binary && e.op == "AND") {
    auto out = conjuncts(e.args[0]);
    auto rhs = conjuncts(e.args[1]);
    out.insert(out.end(), rhs.begin(), rhs.end());
    return out;
  }
  return {e};
}

std::optional<Expr> and_chain(std::vector<Expr> parts) {
  if (parts.empty()) return std::nullopt;
  Expr acc = std::move(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    acc = Expr::binary("AND", std::move(acc), std::move(parts[i]));
  }
  return acc;
}

}  // namespace fdnl2sql::sql
