#pragma once

#include <json.hpp>

#include "fdnl2sql/augment/augmenter.hpp"
#include "fdnl2sql/bank/bank.hpp"
#include "fdnl2sql/exec/executor.hpp"
#include "fdnl2sql/metrics/metrics.hpp"
#include "fdnl2sql/pipeline/pipeline.hpp"
#include "fdnl2sql/schema/schema.hpp"
#include "fdnl2sql/sql/guard.hpp"

namespace fdnl2sql::service {

using Json = nlohmann::ordered_json;

/// Serializes with invalid UTF-8 (possible in provider replies) replaced
/// by U+FFFD instead of throwing.
std::string dump(const Json& j, int indent = -1);

Json to_json(const exec::Cell& c);
Json to_json(const exec::ResultTable& t);
Json to_json(const sql::GuardReport& r);
Json to_json(const bank::RetrievalHit& h);
/// Embeddings are left out.
Json to_json(const bank::Exemplar& e);
Json to_json(const augment::AugmentReport& r);
Json to_json(const metrics::MetricReport& r);
Json to_json(const schema::SchemaDict& s);

struct TraceJsonOptions {
  bool timings = true;
  bool created_at = true;
};
Json to_json(const pipeline::PipelineTrace& t, const TraceJsonOptions& opts = {});

exec::Cell cell_from_json(const Json& j);
exec::ResultTable result_from_json(const Json& j);
sql::GuardReport guard_from_json(const Json& j);
bank::RetrievalHit hit_from_json(const Json& j);
pipeline::PipelineTrace trace_from_json(const Json& j);

}  // namespace fdnl2sql::service
