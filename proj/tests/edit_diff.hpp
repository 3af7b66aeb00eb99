#pragma once

#include <cstddef>
#include <vector>

#include "fdnl2sql/sql/analysis.hpp"
#include "fdnl2sql/sql/ast.hpp"

namespace testsupport {

using fdnl2sql::sql::Expr;
using fdnl2sql::sql::SelectStmt;

/// Number of minimal differing subtrees between two expressions: a node
/// whose own fields differ, or whose arity differs, counts once; otherwise
/// the children are compared pairwise.
inline std::size_t expr_diff(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.op != b.op || a.text != b.text || a.qualifier != b.qualifier ||
      a.literal != b.literal || a.negated != b.negated || a.distinct != b.distinct ||
      a.args.size() != b.args.size() || !(a.subquery == b.subquery)) {
    return 1;
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.args.size(); ++i) n += expr_diff(a.args[i], b.args[i]);
  return n;
}

/// True when `sub` is `full` with some items removed, order kept.
template <class T>
bool is_subsequence(const std::vector<T>& sub, const std::vector<T>& full) {
  std::size_t j = 0;
  for (const auto& x : full) {
    if (j < sub.size() && sub[j] == x) ++j;
  }
  return j == sub.size();
}

/// Edit sites between a parent SELECT and a variant. Removing projection
/// items or WHERE conjuncts (order kept) is one clause-level site; any
/// other difference is counted per minimal differing node. Returns a large
/// number for changes outside projection and WHERE.
inline std::size_t edit_sites(const SelectStmt& parent, const SelectStmt& variant) {
  constexpr std::size_t kOther = 1000;
  const auto& pc = parent.core;
  const auto& vc = variant.core;
  if (!(pc.from == vc.from) || pc.group_by != vc.group_by || !(pc.having == vc.having) ||
      pc.distinct != vc.distinct || parent.order_by != variant.order_by ||
      !(parent.limit == variant.limit) || !(parent.offset == variant.offset) ||
      parent.ctes != variant.ctes || parent.compounds != variant.compounds) {
    return kOther;
  }
  std::size_t sites = 0;
  if (pc.columns.size() != vc.columns.size()) {
    if (!is_subsequence(vc.columns, pc.columns) || vc.columns.empty()) return kOther;
    ++sites;
  } else {
    for (std::size_t i = 0; i < pc.columns.size(); ++i) {
      if (pc.columns[i].alias != vc.columns[i].alias) return kOther;
      sites += expr_diff(pc.columns[i].expr, vc.columns[i].expr);
    }
  }
  std::vector<Expr> pw, vw;
  if (pc.where) pw = fdnl2sql::sql::conjuncts(*pc.where);
  if (vc.where) vw = fdnl2sql::sql::conjuncts(*vc.where);
  if (pw.size() != vw.size()) {
    if (!is_subsequence(vw, pw)) return kOther;
    ++sites;
  } else {
    for (std::size_t i = 0; i < pw.size(); ++i) sites += expr_diff(pw[i], vw[i]);
  }
  return sites;
}

}  // namespace testsupport
