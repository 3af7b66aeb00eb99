#pragma once

#include <optional>
#include <string>

#include "fdnl2sql/exec/executor.hpp"
#include "fdnl2sql/metrics/metrics.hpp"

namespace fdnl2sql::metrics {

/// Runs both queries. The gold query must succeed (its error propagates);
/// a prediction that fails to parse, guard or execute leaves `pred` empty
/// and records why in `flags` (parse_error, guard codes, execution_error,
/// execution_timeout). Guard diagnostics such as limit_without_order_by
/// are flagged either way.
SampleOutcome run_sample(const exec::Executor& db, const std::string& pred_sql,
                         const std::string& gold_sql, std::optional<double> conf = std::nullopt,
                         const exec::ExecOptions& opts = {});

}  // namespace fdnl2sql::metrics
