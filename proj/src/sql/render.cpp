#include "fdnl2sql/sql/render.hpp"

#include <cctype>

#include "fdnl2sql/sql/parser.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::sql {

namespace {

bool needs_quotes(std::string_view name) {
  if (name.empty()) return true;
  auto first = static_cast<unsigned char>(name.front());
  if (!(std::islower(first) || name.front() == '_' || first >= 0x80)) return true;
  for (char c : name) {
    auto u = static_cast<unsigned char>(c);
    if (!(std::islower(u) || std::isdigit(u) || c == '_' || c == '$' || u >= 0x80)) return true;
  }
  if (is_reserved_word(name)) return true;
  for (auto kw : {"true", "false", "current_date", "current_time", "current_timestamp"}) {
    if (name == kw) return true;
  }
  return false;
}

std::string qualified(std::string_view dotted) {
  std::string out;
  std::size_t start = 0;
  while (true) {
    auto dot = dotted.find('.', start);
    out += quote_identifier(dotted.substr(start, dot - start));
    if (dot == std::string_view::npos) break;
    out += '.';
    start = dot + 1;
  }
  return out;
}

class Renderer {
 public:
  explicit Renderer(const RenderOptions& opts) : opts_(opts) {}

  std::string expr(const Expr& e) const {
    switch (e.kind) {
      case ExprKind::Literal:
        return literal(e);
      case ExprKind::Column:
        return e.qualifier.empty() ? quote_identifier(e.text)
                                   : qualified(e.qualifier) + "." + quote_identifier(e.text);
      case ExprKind::Star:
        return e.qualifier.empty() ? "*" : qualified(e.qualifier) + ".*";
      case ExprKind::Param:
        return e.text;
      case ExprKind::Unary: {
        if (e.op == "NOT") return "NOT " + wrap(e.args[0], 3);
        auto operand = wrap(e.args[0], 10);
        bool spaced = !operand.empty() && (operand.front() == '-' || operand.front() == '+');
        return e.op + (spaced ? " " : "") + operand;
      }
      case ExprKind::Binary: {
        int p = precedence(e);
        auto out = wrap(e.args[0], p) + " " + e.op + " " + wrap(e.args[1], p + 1);
        if (e.args.size() > 2) out += " ESCAPE " + wrap(e.args[2], p + 1);
        return out;
      }
      case ExprKind::Between:
        return wrap(e.args[0], 4) + (e.negated ? " NOT BETWEEN " : " BETWEEN ") +
               wrap(e.args[1], 5) + " AND " + wrap(e.args[2], 5);
      case ExprKind::In: {
        std::string out = wrap(e.args[0], 4) + (e.negated ? " NOT IN (" : " IN (");
        if (e.subquery) {
          out += select(*e.subquery);
        } else {
          for (std::size_t i = 1; i < e.args.size(); ++i) {
            if (i > 1) out += ", ";
            out += expr(e.args[i]);
          }
        }
        return out + ")";
      }
      case ExprKind::Function: {
        std::string out = e.text + "(";
        if (e.distinct) out += "DISTINCT ";
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          if (i) out += ", ";
          out += expr(e.args[i]);
        }
        return out + ")";
      }
      case ExprKind::Cast:
        return "CAST(" + expr(e.args[0]) + " AS " + e.text + ")";
      case ExprKind::Case: {
        std::string out = "CASE";
        std::size_t i = 0;
        if (e.has_base) out += " " + expr(e.args[i++]);
        std::size_t pairs_end = e.args.size() - (e.has_else ? 1 : 0);
        for (; i + 2 <= pairs_end; i += 2) {
          out += " WHEN " + expr(e.args[i]) + " THEN " + expr(e.args[i + 1]);
        }
        if (e.has_else) out += " ELSE " + expr(e.args.back());
        return out + " END";
      }
      case ExprKind::Exists:
        return "EXISTS (" + select(*e.subquery) + ")";
      case ExprKind::Subquery:
        return "(" + select(*e.subquery) + ")";
      case ExprKind::List: {
        std::string out = "(";
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          if (i) out += ", ";
          out += expr(e.args[i]);
        }
        return out + ")";
      }
      case ExprKind::Collate:
        return wrap(e.args[0], 11) + " COLLATE " + e.text;
    }
    return {};
  }

  std::string select(const SelectStmt& s) const {
    std::string out;
    if (!s.ctes.empty()) {
      out += s.recursive ? "WITH RECURSIVE " : "WITH ";
      for (std::size_t i = 0; i < s.ctes.size(); ++i) {
        const auto& c = s.ctes[i];
        if (i) out += ", ";
        out += quote_identifier(c.name);
        if (!c.columns.empty()) {
          out += "(";
          for (std::size_t k = 0; k < c.columns.size(); ++k) {
            if (k) out += ", ";
            out += quote_identifier(c.columns[k]);
          }
          out += ")";
        }
        out += " AS (" + select(*c.body) + ")";
      }
      out += " ";
    }
    out += core(s.core);
    for (const auto& part : s.compounds) out += " " + part.op + " " + core(part.core);
    if (!s.order_by.empty()) {
      out += " ORDER BY ";
      for (std::size_t i = 0; i < s.order_by.size(); ++i) {
        const auto& t = s.order_by[i];
        if (i) out += ", ";
        out += expr(t.expr);
        if (t.descending) out += " DESC";
        if (!t.nulls.empty()) out += " NULLS " + t.nulls;
      }
    }
    if (s.limit) {
      out += " LIMIT " + expr(*s.limit);
      if (s.offset) out += " OFFSET " + expr(*s.offset);
    }
    return out;
  }

 private:
  const RenderOptions& opts_;

  std::string wrap(const Expr& e, int min_prec) const {
    auto text = expr(e);
    return precedence(e) < min_prec ? "(" + text + ")" : text;
  }

  std::string literal(const Expr& e) const {
    switch (e.literal) {
      case LiteralKind::Number:
        return opts_.placeholders ? "<number>" : e.text;
      case LiteralKind::String:
        return opts_.placeholders ? "<text>" : quote_string(e.text);
      case LiteralKind::Blob:
        return opts_.placeholders ? "<blob>" : "X'" + e.text + "'";
      case LiteralKind::Null:
        return "NULL";
      case LiteralKind::Bool:
      case LiteralKind::Keyword:
        return e.text;
    }
    return {};
  }

  std::string table(const TableRef& t) const {
    std::string out = t.subquery ? "(" + select(*t.subquery) + ")" : qualified(t.name);
    if (t.alias) out += " AS " + quote_identifier(*t.alias);
    return out;
  }

  std::string core(const SelectCore& c) const {
    if (!c.values.empty()) {
      std::string out = "VALUES ";
      for (std::size_t r = 0; r < c.values.size(); ++r) {
        if (r) out += ", ";
        out += "(";
        for (std::size_t i = 0; i < c.values[r].size(); ++i) {
          if (i) out += ", ";
          out += expr(c.values[r][i]);
        }
        out += ")";
      }
      return out;
    }
    std::string out = c.distinct ? "SELECT DISTINCT " : "SELECT ";
    for (std::size_t i = 0; i < c.columns.size(); ++i) {
      if (i) out += ", ";
      out += expr(c.columns[i].expr);
      if (c.columns[i].alias) out += " AS " + quote_identifier(*c.columns[i].alias);
    }
    if (c.from) {
      out += " FROM " + table(c.from->first);
      for (const auto& j : c.from->joins) {
        out += j.op == "," ? ", " : " " + j.op + " ";
        out += table(j.table);
        if (j.on) out += " ON " + expr(*j.on);
        if (!j.using_columns.empty()) {
          out += " USING (";
          for (std::size_t i = 0; i < j.using_columns.size(); ++i) {
            if (i) out += ", ";
            out += quote_identifier(j.using_columns[i]);
          }
          out += ")";
        }
      }
    }
    if (c.where) out += " WHERE " + expr(*c.where);
    if (!c.group_by.empty()) {
      out += " GROUP BY ";
      for (std::size_t i = 0; i < c.group_by.size(); ++i) {
        if (i) out += ", ";
        out += expr(c.group_by[i]);
      }
    }
    if (c.having) out += " HAVING " + expr(*c.having);
    return out;
  }
};

}  // namespace

std::string quote_identifier(std::string_view name) {
  if (!needs_quotes(name)) return std::string(name);
  std::string out = "\"";
  for (char c : name) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string quote_string(std::string_view value) {
  std::string out = "'";
  for (char c : value) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

std::string render_expr(const Expr& e, const RenderOptions& opts) {
  return Renderer(opts).expr(e);
}

std::string render_select(const SelectStmt& s, const RenderOptions& opts) {
  return Renderer(opts).select(s);
}

std::string normalize_sql(const SqlQuery& q) {
  std::vector<std::string> parts;
  for (const auto& st : q.statements) {
    parts.push_back(st.select ? render_select(*st.select) : util::collapse_whitespace(st.text));
  }
  return util::join(parts, "; ");
}

std::string normalize_sql(std::string_view raw) { return normalize_sql(parse_sql(raw)); }

}  // namespace fdnl2sql::sql
