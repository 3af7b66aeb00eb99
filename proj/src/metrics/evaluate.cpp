#include "fdnl2sql/metrics/evaluate.hpp"

#include <algorithm>

#include "fdnl2sql/sql/guard.hpp"
#include "fdnl2sql/sql/parser.hpp"

namespace fdnl2sql::metrics {

SampleOutcome run_sample(const exec::Executor& db, const std::string& pred_sql,
                         const std::string& gold_sql, std::optional<double> conf,
                         const exec::ExecOptions& opts) {
  SampleOutcome s;
  s.pred_sql = pred_sql;
  s.gold_sql = gold_sql;
  s.conf = conf;
  s.gold = db.execute(sql::parse_sql(gold_sql), opts);

  sql::SqlQuery q;
  try {
    q = sql::parse_sql(pred_sql);
  } catch (const Error& e) {
    s.flags.push_back(e.code());
    return s;
  }
  auto report = sql::guard(q, db.schema());
  s.flags = report.flags();
  if (!report.passes()) return s;
  try {
    s.pred = db.execute(q, opts);
  } catch (const Error& e) {
    s.flags.push_back(e.code());
    std::sort(s.flags.begin(), s.flags.end());
  }
  return s;
}

}  // namespace fdnl2sql::metrics
