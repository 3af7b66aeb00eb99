#include "fdnl2sql/sql/guard.hpp"

#include <map>
#include <optional>
#include <set>

#include "fdnl2sql/sql/analysis.hpp"
#include "fdnl2sql/sql/render.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::sql {

bool GuardReport::has(std::string_view code) const {
  for (const auto& v : violations) {
    if (v.code == code) return true;
  }
  return false;
}

std::vector<std::string> GuardReport::flags() const {
  std::set<std::string> out;
  for (const auto& v : violations) out.insert(v.code);
  if (limit_without_order_by) out.insert("limit_without_order_by");
  return {out.begin(), out.end()};
}

namespace {

using schema::TypeGroup;

struct ColDef {
  std::string name;
  std::optional<TypeGroup> group;
};

/// Column set of a FROM item. `open` means the columns are not known
/// statically (self-reference of a recursive CTE), so any name resolves.
struct Source {
  std::string visible;
  bool base = false;
  bool open = false;
  std::vector<ColDef> columns;
  std::vector<std::string> using_columns;

  const ColDef* find(std::string_view name) const {
    for (const auto& c : columns) {
      if (util::iequals(c.name, name)) return &c;
    }
    return nullptr;
  }
};

struct Scope {
  const Scope* parent = nullptr;
  std::vector<Source> sources;
  std::vector<std::string> aliases;
  bool allow_aliases = false;
};

struct CteEnv {
  const CteEnv* parent = nullptr;
  std::map<std::string, Source> defs;

  const Source* find(const std::string& name) const {
    for (const auto* e = this; e; e = e->parent) {
      auto it = e->defs.find(name);
      if (it != e->defs.end()) return &it->second;
    }
    return nullptr;
  }
};

bool is_rowid(std::string_view name) {
  return util::iequals(name, "rowid") || util::iequals(name, "oid") ||
         util::iequals(name, "_rowid_");
}

std::string strip_schema_prefix(const std::string& name) {
  for (std::string_view p : {"main.", "temp."}) {
    if (name.size() > p.size() && util::istarts_with(name, p)) return name.substr(p.size());
  }
  return name;
}

class Checker {
 public:
  Checker(const schema::SchemaDict& s, GuardReport& r) : schema_(s), report_(r) {}

  std::vector<ColDef> select(const SelectStmt& s, const Scope* parent, const CteEnv* env) {
    CteEnv local;
    local.parent = env;
    if (!s.ctes.empty()) {
      for (const auto& cte : s.ctes) {
        Source placeholder;
        placeholder.visible = cte.name;
        placeholder.open = cte.columns.empty();
        for (const auto& c : cte.columns) placeholder.columns.push_back({c, std::nullopt});
        local.defs[cte.name] = placeholder;
        auto outputs = select(*cte.body, parent, &local);
        auto& def = local.defs[cte.name];
        def.open = false;
        if (cte.columns.empty()) {
          def.columns = outputs;
        } else {
          for (std::size_t i = 0; i < def.columns.size() && i < outputs.size(); ++i) {
            def.columns[i].group = outputs[i].group;
          }
        }
      }
      env = &local;
    }

    if (s.limit && s.order_by.empty()) report_.limit_without_order_by = true;

    Scope first_scope;
    auto outputs = core(s.core, parent, env, first_scope);
    for (const auto& part : s.compounds) {
      Scope scratch;
      core(part.core, parent, env, scratch);
    }
    first_scope.allow_aliases = true;
    for (const auto& o : outputs) first_scope.aliases.push_back(o.name);
    for (const auto& t : s.order_by) expr(t.expr, first_scope, env);
    Scope empty;
    empty.parent = parent;
    if (s.limit) expr(*s.limit, empty, env);
    if (s.offset) expr(*s.offset, empty, env);
    return outputs;
  }

 private:
  const schema::SchemaDict& schema_;
  GuardReport& report_;

  void violation(std::string code, std::string detail) {
    report_.violations.push_back({std::move(code), std::move(detail)});
  }

  Source table_source(const TableRef& t, const Scope* parent, const CteEnv* env) {
    Source src;
    if (t.subquery) {
      src.columns = select(*t.subquery, parent, env);
    } else {
      auto name = strip_schema_prefix(t.name);
      if (const auto* cte = env ? env->find(name) : nullptr) {
        src = *cte;
      } else if (const auto* info = schema_.find_table(name)) {
        src.base = true;
        for (const auto& c : info->columns) src.columns.push_back({c.name, c.group});
      } else {
        violation("unknown_table", t.name);
        src.open = true;
      }
    }
    src.visible = t.visible_name();
    return src;
  }

  std::vector<ColDef> core(const SelectCore& c, const Scope* parent, const CteEnv* env,
                           Scope& scope) {
    scope.parent = parent;
    if (!c.values.empty()) {
      std::vector<ColDef> out;
      for (const auto& row : c.values) {
        for (const auto& v : row) expr(v, scope, env);
      }
      for (std::size_t i = 0; i < c.values.front().size(); ++i) {
        out.push_back({"column" + std::to_string(i + 1), std::nullopt});
      }
      return out;
    }

    if (c.from) {
      scope.sources.push_back(table_source(c.from->first, parent, env));
      for (const auto& j : c.from->joins) {
        auto src = table_source(j.table, parent, env);
        for (const auto& u : j.using_columns) {
          const ColDef* right = src.open ? nullptr : src.find(u);
          const ColDef* left = nullptr;
          bool left_open = false;
          for (const auto& prev : scope.sources) {
            if (prev.open) left_open = true;
            if (const auto* f = prev.find(u)) left = f;
          }
          if ((!right && !src.open) || (!left && !left_open)) {
            violation("unknown_column", u);
          } else if (left && right && left->group && right->group && *left->group != *right->group) {
            violation("join_type_mismatch", "USING (" + u + ")");
          }
          src.using_columns.push_back(u);
        }
        scope.sources.push_back(std::move(src));
      }
      for (const auto& j : c.from->joins) {
        if (!j.on) continue;
        expr(*j.on, scope, env);
        for (const auto& part : conjuncts(*j.on)) join_types(part, scope);
      }
    }

    std::vector<ColDef> out;
    for (const auto& rc : c.columns) {
      const auto& e = rc.expr;
      if (e.kind == ExprKind::Star) {
        bool found = e.qualifier.empty();
        for (const auto& s : scope.sources) {
          if (!e.qualifier.empty() && !util::iequals(s.visible, e.qualifier)) continue;
          found = true;
          out.insert(out.end(), s.columns.begin(), s.columns.end());
        }
        if (!found) violation("unknown_table", e.qualifier);
        continue;
      }
      auto resolved = expr(e, scope, env);
      ColDef d;
      if (rc.alias) {
        d.name = *rc.alias;
      } else if (e.kind == ExprKind::Column) {
        d.name = e.text;
      } else {
        d.name = render_expr(e);
      }
      d.group = resolved ? resolved->group : std::nullopt;
      out.push_back(std::move(d));
    }

    scope.allow_aliases = true;
    for (const auto& rc : c.columns) {
      if (rc.alias) scope.aliases.push_back(*rc.alias);
    }
    if (c.where) expr(*c.where, scope, env);
    for (const auto& g : c.group_by) expr(g, scope, env);
    if (c.having) expr(*c.having, scope, env);
    scope.allow_aliases = false;
    return out;
  }

  void join_types(const Expr& e, const Scope& scope) {
    if (e.kind != ExprKind::Binary || e.op != "=") return;
    if (e.args[0].kind != ExprKind::Column || e.args[1].kind != ExprKind::Column) return;
    auto a = lookup(e.args[0], scope);
    auto b = lookup(e.args[1], scope);
    if (a && b && a->group && b->group && *a->group != *b->group) {
      violation("join_type_mismatch", render_expr(e));
    }
  }

  // Resolution without reporting; used for the join type check.
  std::optional<ColDef> lookup(const Expr& col, const Scope& scope) {
    for (const auto* s = &scope; s; s = s->parent) {
      for (const auto& src : s->sources) {
        if (!col.qualifier.empty() && !util::iequals(src.visible, col.qualifier)) continue;
        if (const auto* c = src.find(col.text)) return *c;
      }
    }
    return std::nullopt;
  }

  /// Returns the column definition when resolved to one with known type.
  std::optional<ColDef> column(const Expr& col, const Scope& scope) {
    auto shown = col.qualifier.empty() ? col.text : col.qualifier + "." + col.text;
    if (!col.qualifier.empty()) {
      for (const auto* s = &scope; s; s = s->parent) {
        for (const auto& src : s->sources) {
          if (!util::iequals(src.visible, col.qualifier)) continue;
          if (src.open) return ColDef{col.text, std::nullopt};
          if (const auto* c = src.find(col.text)) return *c;
          if (src.base && is_rowid(col.text)) return ColDef{col.text, TypeGroup::Numeric};
          violation("unknown_column", shown);
          return std::nullopt;
        }
      }
      violation("unknown_table", col.qualifier);
      return std::nullopt;
    }

    bool any_base = false;
    for (const auto* s = &scope; s; s = s->parent) {
      const ColDef* match = nullptr;
      int matches = 0;
      bool shared_using = false;
      bool open = false;
      for (const auto& src : s->sources) {
        if (src.base) any_base = true;
        if (src.open) open = true;
        if (const auto* c = src.find(col.text)) {
          ++matches;
          if (!match) match = c;
        }
        for (const auto& u : src.using_columns) {
          if (util::iequals(u, col.text)) shared_using = true;
        }
      }
      if (matches > 1 && !shared_using) {
        violation("ambiguous_column", shown);
        return std::nullopt;
      }
      if (match) return *match;
      if (s->allow_aliases) {
        for (const auto& a : s->aliases) {
          if (util::iequals(a, col.text)) return ColDef{col.text, std::nullopt};
        }
      }
      if (open) return ColDef{col.text, std::nullopt};
    }
    if (any_base && is_rowid(col.text)) return ColDef{col.text, TypeGroup::Numeric};
    // SQLite reads an unresolvable double-quoted name as a string literal.
    if (col.hint.double_quoted) return std::nullopt;
    violation("unknown_column", shown);
    return std::nullopt;
  }

  std::optional<ColDef> expr(const Expr& e, const Scope& scope, const CteEnv* env) {
    switch (e.kind) {
      case ExprKind::Column:
        return column(e, scope);
      case ExprKind::Star:
        if (!e.qualifier.empty()) {
          bool found = false;
          for (const auto& src : scope.sources) found |= util::iequals(src.visible, e.qualifier);
          if (!found) violation("unknown_table", e.qualifier);
        }
        return std::nullopt;
      default:
        break;
    }
    if (e.subquery) {
      auto outs = select(*e.subquery, &scope, env);
      for (const auto& a : e.args) expr(a, scope, env);
      if (e.kind == ExprKind::Subquery && outs.size() == 1) return outs.front();
      return std::nullopt;
    }
    for (const auto& a : e.args) expr(a, scope, env);
    return std::nullopt;
  }
};

}  // namespace

GuardReport guard(const SqlQuery& q, const schema::SchemaDict& schema) {
  GuardReport r;
  r.read_only = !q.statements.empty();
  r.single_statement = q.statements.size() == 1;
  for (const auto& st : q.statements) {
    if (st.kind == StatementKind::Other) {
      r.read_only = false;
      r.violations.push_back({"non_read_only", st.verb + " statement"});
    }
  }
  if (!r.single_statement) {
    r.violations.push_back(
        {"multiple_statements", std::to_string(q.statements.size()) + " statements"});
  }
  if (!r.read_only) return r;

  Checker checker(schema, r);
  auto before = r.violations.size();
  for (const auto& st : q.statements) checker.select(*st.select, nullptr, nullptr);
  r.schema_valid = r.violations.size() == before;
  return r;
}

}  // namespace fdnl2sql::sql
