#include "fdnl2sql/augment/mutations.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "fdnl2sql/sql/analysis.hpp"
#include "fdnl2sql/sql/render.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::augment {

namespace {

using schema::TypeGroup;
using sql::Expr;
using sql::ExprKind;
using sql::LiteralKind;

constexpr std::pair<MutationKind, std::string_view> kNames[] = {
    {MutationKind::OpChange, "op_change"},
    {MutationKind::ColumnSubstitute, "column_substitute"},
    {MutationKind::ValueEditNumeric, "value_edit_numeric"},
    {MutationKind::ValueEditText, "value_edit_text"},
    {MutationKind::KeepTwoColumns, "keep_two_columns"},
    {MutationKind::DropOneColumn, "drop_one_column"},
    {MutationKind::DropOneWhere, "drop_one_where"},
    {MutationKind::DropTwoWhere, "drop_two_where"},
    {MutationKind::KeepOneWhere, "keep_one_where"},
    {MutationKind::RemoveWhere, "remove_where"},
};

struct ColRef {
  const schema::TableInfo* table = nullptr;
  const schema::ColumnInfo* column = nullptr;
};

// Base tables of the core's FROM, keyed by the name columns qualify with.
std::map<std::string, const schema::TableInfo*> base_tables(const sql::SelectStmt& s,
                                                            const schema::SchemaDict& schema) {
  std::map<std::string, const schema::TableInfo*> out;
  if (!s.core.from) return out;
  auto add = [&](const sql::TableRef& t) {
    if (t.subquery) return;
    for (const auto& cte : s.ctes) {
      if (util::iequals(cte.name, t.name)) return;
    }
    if (const auto* info = schema.find_table(t.name)) out[t.visible_name()] = info;
  };
  add(s.core.from->first);
  for (const auto& j : s.core.from->joins) add(j.table);
  return out;
}

std::optional<ColRef> resolve(const Expr& col,
                              const std::map<std::string, const schema::TableInfo*>& tables) {
  if (col.kind != ExprKind::Column) return std::nullopt;
  if (!col.qualifier.empty()) {
    auto it = tables.find(col.qualifier);
    if (it == tables.end()) return std::nullopt;
    const auto* c = it->second->find(col.text);
    if (!c) return std::nullopt;
    return ColRef{it->second, c};
  }
  std::optional<ColRef> found;
  for (const auto& [name, t] : tables) {
    if (const auto* c = t->find(col.text)) {
      if (found) return std::nullopt;  // ambiguous
      found = ColRef{t, c};
    }
  }
  return found;
}

bool is_numeric_group(TypeGroup g) { return g == TypeGroup::Numeric || g == TypeGroup::Temporal; }

bool is_comparison(const std::string& op) {
  return op == "=" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=";
}

struct Predicate {
  std::vector<std::size_t> path;  // child indices from the WHERE root
  ColRef ref;
};

// Column-vs-literal predicates anywhere in the WHERE tree (subqueries excluded).
void collect_predicates(const Expr& e, std::vector<std::size_t>& path,
                        const std::map<std::string, const schema::TableInfo*>& tables,
                        std::vector<Predicate>& out) {
  if (e.kind == ExprKind::Binary && (is_comparison(e.op) || e.op == "LIKE") &&
      e.args.size() == 2 && e.args[1].kind == ExprKind::Literal &&
      (e.args[1].literal == LiteralKind::Number || e.args[1].literal == LiteralKind::String)) {
    if (auto ref = resolve(e.args[0], tables)) out.push_back({path, *ref});
    return;
  }
  for (std::size_t i = 0; i < e.args.size(); ++i) {
    path.push_back(i);
    collect_predicates(e.args[i], path, tables, out);
    path.pop_back();
  }
}

Expr& at_path(Expr& root, const std::vector<std::size_t>& path) {
  Expr* e = &root;
  for (auto i : path) e = &e->args[i];
  return *e;
}

std::string path_site(const std::vector<std::size_t>& path) {
  std::string s = "where";
  for (auto i : path) s += "/" + std::to_string(i);
  return s;
}

int decimals_of(const std::string& lexeme) {
  auto dot = lexeme.find('.');
  if (dot == std::string::npos) return 0;
  return static_cast<int>(lexeme.size() - dot - 1);
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s == "-0" || s.rfind("-0.", 0) == 0) {
    bool all_zero = true;
    for (char c : s.substr(1)) all_zero &= (c == '0' || c == '.');
    if (all_zero) s = s.substr(1);
  }
  return s;
}

std::string strip_percent(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && s[a] == '%') ++a;
  while (b > a && s[b - 1] == '%') --b;
  return s.substr(a, b - a);
}

class Enumerator {
 public:
  Enumerator(const sql::SelectStmt& s, const schema::SchemaDict& schema, std::uint64_t seed,
             const ValueSampler& sampler)
      : s_(s), tables_(base_tables(s, schema)), rng_(seed), sampler_(sampler) {
    if (s.core.where) {
      std::vector<std::size_t> path;
      collect_predicates(*s.core.where, path, tables_, preds_);
    }
  }

  std::vector<Mutation> run() {
    op_change();
    column_substitute();
    value_edit_numeric();
    value_edit_text();
    projection_kinds();
    where_kinds();
    return std::move(out_);
  }

 private:
  const sql::SelectStmt& s_;
  std::map<std::string, const schema::TableInfo*> tables_;
  util::Rng rng_;
  const ValueSampler& sampler_;
  std::vector<Predicate> preds_;
  std::vector<Mutation> out_;

  void emit(MutationKind kind, std::string site, std::string before, std::string after,
            sql::SelectStmt&& variant) {
    Mutation m;
    m.kind = kind;
    m.site = std::move(site);
    m.before = std::move(before);
    m.after = std::move(after);
    m.variant_sql = sql::render_select(variant);
    m.variant = std::move(variant);
    out_.push_back(std::move(m));
  }

  // Replaces the predicate at `p` via `edit` and emits the variant.
  template <class F>
  void edit_predicate(MutationKind kind, const Predicate& p, F edit) {
    auto variant = s_;
    auto& node = at_path(*variant.core.where, p.path);
    auto before = sql::render_expr(node);
    edit(node);
    emit(kind, path_site(p.path), before, sql::render_expr(node), std::move(variant));
  }

  const Expr& pred_expr(const Predicate& p) const {
    return at_path(const_cast<Expr&>(*s_.core.where), p.path);
  }

  void op_change() {
    static const std::vector<std::string> numeric_ops = {"=", "!=", "<", "<=", ">", ">="};
    for (const auto& p : preds_) {
      const auto& e = pred_expr(p);
      const auto& lit = e.args[1];
      if (is_numeric_group(p.ref.column->group) && lit.literal == LiteralKind::Number &&
          is_comparison(e.op)) {
        for (const auto& op : numeric_ops) {
          if (op == e.op) continue;
          edit_predicate(MutationKind::OpChange, p, [&](Expr& n) { n.op = op; });
        }
      } else if (p.ref.column->group == TypeGroup::Text && lit.literal == LiteralKind::String) {
        if (e.op == "=" || e.op == "!=") {
          auto other = e.op == "=" ? "!=" : "=";
          edit_predicate(MutationKind::OpChange, p, [&](Expr& n) { n.op = other; });
          edit_predicate(MutationKind::OpChange, p, [&](Expr& n) {
            n.op = "LIKE";
            n.args[1] = Expr::string("%" + n.args[1].text + "%");
          });
        } else if (e.op == "LIKE") {
          auto bare = strip_percent(lit.text);
          if (bare.empty()) continue;
          for (const char* op : {"=", "!="}) {
            edit_predicate(MutationKind::OpChange, p, [&](Expr& n) {
              n.op = op;
              n.args[1] = Expr::string(bare);
            });
          }
        }
      }
    }
  }

  void column_substitute() {
    // Projection items that are plain columns.
    for (std::size_t i = 0; i < s_.core.columns.size(); ++i) {
      const auto& e = s_.core.columns[i].expr;
      auto ref = resolve(e, tables_);
      if (!ref) continue;
      for (const auto& c : ref->table->columns) {
        if (&c == ref->column || c.group != ref->column->group) continue;
        bool present = false;
        for (const auto& rc : s_.core.columns) {
          present |= rc.expr.kind == ExprKind::Column && util::iequals(rc.expr.text, c.name);
        }
        if (present) continue;
        auto variant = s_;
        auto& node = variant.core.columns[i].expr;
        auto before = sql::render_expr(node);
        node.text = util::to_lower(c.name);
        emit(MutationKind::ColumnSubstitute, "select[" + std::to_string(i) + "]", before,
             sql::render_expr(node), std::move(variant));
      }
    }
    for (const auto& p : preds_) {
      for (const auto& c : p.ref.table->columns) {
        if (&c == p.ref.column || c.group != p.ref.column->group) continue;
        edit_predicate(MutationKind::ColumnSubstitute, p,
                       [&](Expr& n) { n.args[0].text = util::to_lower(c.name); });
      }
    }
  }

  void value_edit_numeric() {
    for (const auto& p : preds_) {
      const auto& e = pred_expr(p);
      const auto& lit = e.args[1];
      if (!is_numeric_group(p.ref.column->group) || lit.literal != LiteralKind::Number ||
          !is_comparison(e.op))
        continue;
      if (lit.text.find_first_of("eExX") != std::string::npos) continue;
      double v = std::strtod(lit.text.c_str(), nullptr);
      int d = decimals_of(lit.text);
      double unit = std::pow(10.0, -d);
      std::vector<double> cands;
      if (p.ref.column->group == TypeGroup::Temporal) {
        cands = {v - 1.0, v + 1.0};
        d = 0;
        if (decimals_of(lit.text) > 0) d = decimals_of(lit.text);
      } else {
        for (double f : {0.9, 1.1}) {
          double scaled = std::round(v * f / unit) * unit;
          if (scaled == v) scaled = (f < 1.0) == (v >= 0) ? v - unit : v + unit;
          cands.push_back(scaled);
        }
      }
      for (double c : cands) {
        // Threshold edits only ever widen the feasible set.
        if ((e.op == ">" || e.op == ">=") && !(c < v)) continue;
        if ((e.op == "<" || e.op == "<=") && !(c > v)) continue;
        auto text = format_fixed(c, d);
        if (text == lit.text) continue;
        edit_predicate(MutationKind::ValueEditNumeric, p,
                       [&](Expr& n) { n.args[1] = Expr::number(text); });
      }
    }
  }

  void value_edit_text() {
    if (!sampler_) return;
    for (const auto& p : preds_) {
      const auto& e = pred_expr(p);
      const auto& lit = e.args[1];
      if (p.ref.column->group != TypeGroup::Text || lit.literal != LiteralKind::String ||
          (e.op != "=" && e.op != "!="))
        continue;
      std::vector<std::string> values;
      for (const auto& cell : sampler_(p.ref.table->name, p.ref.column->name)) {
        if (const auto* s = std::get_if<std::string>(&cell); s && *s != lit.text) {
          values.push_back(*s);
        }
      }
      if (values.empty()) continue;
      auto pick = values[rng_.below(values.size())];
      edit_predicate(MutationKind::ValueEditText, p,
                     [&](Expr& n) { n.args[1] = Expr::string(pick); });
    }
  }

  std::string projection_text(const std::vector<sql::ResultColumn>& cols) const {
    std::vector<std::string> parts;
    for (const auto& c : cols) parts.push_back(sql::render_expr(c.expr));
    return util::join(parts, ", ");
  }

  void projection_kinds() {
    const auto& cols = s_.core.columns;
    auto n = cols.size();
    if (n >= 3) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          auto variant = s_;
          variant.core.columns = {cols[i], cols[j]};
          emit(MutationKind::KeepTwoColumns,
               "select[" + std::to_string(i) + "," + std::to_string(j) + "]",
               projection_text(cols), projection_text(variant.core.columns), std::move(variant));
        }
      }
    }
    if (n >= 2) {
      for (std::size_t i = 0; i < n; ++i) {
        auto variant = s_;
        variant.core.columns.erase(variant.core.columns.begin() + static_cast<std::ptrdiff_t>(i));
        emit(MutationKind::DropOneColumn, "select[" + std::to_string(i) + "]",
             sql::render_expr(cols[i].expr), "", std::move(variant));
      }
    }
  }

  void with_conjuncts(MutationKind kind, const std::vector<std::size_t>& keep,
                      const std::vector<Expr>& parts, const std::string& site) {
    std::vector<Expr> kept;
    std::vector<std::string> dropped;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (std::find(keep.begin(), keep.end(), i) != keep.end()) {
        kept.push_back(parts[i]);
      } else {
        dropped.push_back(sql::render_expr(parts[i]));
      }
    }
    auto variant = s_;
    variant.core.where = sql::and_chain(kept);
    auto after = variant.core.where ? sql::render_expr(*variant.core.where) : std::string();
    emit(kind, site, util::join(dropped, " AND "), after, std::move(variant));
  }

  void where_kinds() {
    if (!s_.core.where) return;
    auto parts = sql::conjuncts(*s_.core.where);
    auto m = parts.size();
    auto all_but = [&](std::initializer_list<std::size_t> skip) {
      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < m; ++i) {
        if (std::find(skip.begin(), skip.end(), i) == skip.end()) keep.push_back(i);
      }
      return keep;
    };
    if (m >= 2) {
      for (std::size_t i = 0; i < m; ++i) {
        with_conjuncts(MutationKind::DropOneWhere, all_but({i}), parts,
                       "where.conjunct[" + std::to_string(i) + "]");
      }
    }
    if (m >= 3) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
          with_conjuncts(MutationKind::DropTwoWhere, all_but({i, j}), parts,
                         "where.conjunct[" + std::to_string(i) + "," + std::to_string(j) + "]");
        }
      }
    }
    if (m >= 2) {
      for (std::size_t i = 0; i < m; ++i) {
        with_conjuncts(MutationKind::KeepOneWhere, {i}, parts,
                       "where.conjunct[" + std::to_string(i) + "]");
      }
    }
    auto variant = s_;
    variant.core.where.reset();
    emit(MutationKind::RemoveWhere, "where", sql::render_expr(*s_.core.where), "",
         std::move(variant));
  }
};

}  // namespace

std::string_view to_string(MutationKind k) {
  for (const auto& [kind, name] : kNames) {
    if (kind == k) return name;
  }
  return "op_change";
}

std::optional<MutationKind> kind_from_string(std::string_view s) {
  for (const auto& [kind, name] : kNames) {
    if (name == s) return kind;
  }
  return std::nullopt;
}

const std::vector<MutationKind>& all_kinds() {
  static const std::vector<MutationKind> v = [] {
    std::vector<MutationKind> out;
    for (const auto& [kind, name] : kNames) out.push_back(kind);
    return out;
  }();
  return v;
}

std::vector<Mutation> enumerate_mutations(const sql::SqlQuery& q, const schema::SchemaDict& schema,
                                          std::uint64_t rng_seed, const ValueSampler& sampler) {
  const auto* s = q.select();
  if (!s || s->is_compound() || !s->core.values.empty()) return {};
  return Enumerator(*s, schema, rng_seed, sampler).run();
}

}  // namespace fdnl2sql::augment
