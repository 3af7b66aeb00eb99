#include "fdnl2sql/sql/describe.hpp"

#include "fdnl2sql/sql/analysis.hpp"
#include "fdnl2sql/sql/render.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::sql {

Description describe_sql(const SqlQuery& q) {
  Description d;
  const auto* s = q.select();
  if (!s) {
    d.question = "What does this statement return?";
    return d;
  }
  std::vector<std::string> items;
  for (const auto& rc : s->core.columns) items.push_back(render_expr(rc.expr));
  std::string subject = items.empty() ? "rows" : util::join(items, ", ");
  std::string table = "trials";
  if (s->core.from && !s->core.from->first.name.empty()) table = s->core.from->first.name;

  d.question = "Which " + subject + " for " + table;
  if (s->core.where) {
    std::vector<std::string> preds;
    for (const auto& c : conjuncts(*s->core.where)) {
      auto text = render_expr(c);
      preds.push_back(text);
      d.sub_questions.push_back("which " + table + " have " + text + "?");
    }
    d.question += " where " + util::join(preds, " and ");
  }
  d.question += "?";
  return d;
}

}  // namespace fdnl2sql::sql
