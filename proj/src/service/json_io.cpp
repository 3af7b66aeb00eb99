#include "fdnl2sql/service/json_io.hpp"

namespace fdnl2sql::service {

std::string dump(const Json& j, int indent) {
  return j.dump(indent, ' ', false, Json::error_handler_t::replace);
}

Json to_json(const exec::Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return nullptr;
}

Json to_json(const exec::ResultTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    Json row = Json::array();
    for (const auto& c : r) row.push_back(to_json(c));
    rows.push_back(std::move(row));
  }
  Json j;
  j["columns"] = t.columns;
  j["rows"] = std::move(rows);
  j["truncated"] = t.truncated;
  j["row_limit_applied"] = t.row_limit_applied ? Json(*t.row_limit_applied) : Json(nullptr);
  return j;
}

Json to_json(const sql::GuardReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations) v.push_back({{"code", x.code}, {"detail", x.detail}});
  Json j;
  j["passes"] = r.passes();
  j["read_only"] = r.read_only;
  j["single_statement"] = r.single_statement;
  j["schema_valid"] = r.schema_valid;
  j["limit_without_order_by"] = r.limit_without_order_by;
  j["violations"] = std::move(v);
  j["flags"] = r.flags();
  return j;
}

Json to_json(const bank::RetrievalHit& h) {
  Json j;
  j["exemplar_id"] = h.exemplar_id;
  j["score"] = h.score;
  j["where_pattern_hint"] = h.where_pattern_hint;
  j["question"] = h.question;
  j["sql"] = h.sql;
  return j;
}

Json to_json(const bank::Exemplar& e) {
  Json j;
  j["id"] = e.id;
  j["question"] = e.question;
  j["sql"] = e.sql;
  j["decomposition"] = e.decomposition ? Json(*e.decomposition) : Json(nullptr);
  j["source"] = std::string(bank::to_string(e.source));
  j["parent_id"] = e.parent_id ? Json(*e.parent_id) : Json(nullptr);
  j["mutation_kind"] = e.mutation_kind ? Json(*e.mutation_kind) : Json(nullptr);
  j["created_at"] = e.created_at;
  return j;
}

namespace {

Json tally_json(const augment::Tally& t) {
  Json j;
  j["attempted"] = t.attempted;
  j["retained"] = t.retained;
  j["discarded_error"] = t.discarded_error;
  j["discarded_empty"] = t.discarded_empty;
  j["discarded_duplicate"] = t.discarded_duplicate;
  return j;
}

Json hits_json(const std::vector<bank::RetrievalHit>& hits) {
  Json a = Json::array();
  for (const auto& h : hits) a.push_back(to_json(h));
  return a;
}

std::vector<bank::RetrievalHit> hits_from_json(const Json& j) {
  std::vector<bank::RetrievalHit> out;
  for (const auto& h : j) out.push_back(hit_from_json(h));
  return out;
}

}  // namespace

Json to_json(const augment::AugmentReport& r) {
  Json j = tally_json(r);
  j["pending"] = r.pending;
  j["per_kind"] = Json::object();
  for (const auto& [k, n] : r.per_kind) j["per_kind"][k] = n;
  j["per_kind_tally"] = Json::object();
  for (const auto& [k, t] : r.per_kind_tally) j["per_kind_tally"][k] = tally_json(t);
  return j;
}

Json to_json(const metrics::MetricReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json j;
  j["chrf"] = r.chrf;
  j["eem"] = r.eem;
  j["ef1"] = r.ef1;
  j["ast"] = opt(r.ast);
  j["conf"] = opt(r.conf);
  j["hm"] = opt(r.hm);
  j["flags"] = r.flags;
  if (!r.flag_counts.empty()) {
    j["flag_counts"] = Json::object();
    for (const auto& [f, n] : r.flag_counts) j["flag_counts"][f] = n;
  }
  j["samples"] = r.samples;
  return j;
}

Json to_json(const schema::SchemaDict& s) {
  Json tables = Json::array();
  for (const auto& t : s.tables) {
    Json cols = Json::array();
    for (const auto& c : t.columns) {
      cols.push_back({{"name", c.name},
                      {"declared_type", c.declared_type},
                      {"group", std::string(schema::to_string(c.group))},
                      {"nullable", c.nullable}});
    }
    tables.push_back({{"name", t.name}, {"row_count", t.row_count}, {"columns", std::move(cols)}});
  }
  Json joins = Json::array();
  for (const auto& jc : s.join_candidates) {
    joins.push_back({{"left_table", jc.left_table},
                     {"left_column", jc.left_column},
                     {"right_table", jc.right_table},
                     {"right_column", jc.right_column}});
  }
  Json j;
  j["tables"] = std::move(tables);
  j["join_candidates"] = std::move(joins);
  j["fingerprint"] = s.fingerprint;
  j["context"] = schema::render_schema_context(s);
  return j;
}

Json to_json(const pipeline::PipelineTrace& t, const TraceJsonOptions& opts) {
  Json j;
  j["trace_id"] = t.trace_id;
  j["question"] = t.question;
  j["strategy"] = std::string(pipeline::to_string(t.strategy));
  j["k"] = t.k;
  j["decomposition"] = {{"question", t.decomposition.question},
                        {"sub_questions", t.decomposition.sub_questions}};
  Json retrievals = Json::array();
  for (const auto& r : t.retrievals) retrievals.push_back(hits_json(r));
  j["retrievals"] = std::move(retrievals);
  j["demonstrations"] = hits_json(t.demonstrations);
  j["reply"] = t.reply;
  j["synthesized_sql"] = t.synthesized_sql;
  j["guard_report"] = to_json(t.guard_report);
  j["result"] = t.result ? to_json(*t.result) : Json(nullptr);
  j["confidence"] = t.confidence ? Json(*t.confidence) : Json(nullptr);
  if (opts.timings) {
    Json timings = Json::object();
    for (const auto& s : t.timings) timings[s.stage] = s.ms;
    j["timings"] = std::move(timings);
  }
  j["error"] = t.error ? Json{{"stage", t.error->stage},
                              {"code", t.error->code},
                              {"message", t.error->message}}
                       : Json(nullptr);
  if (opts.created_at) j["created_at"] = t.created_at;
  return j;
}

exec::Cell cell_from_json(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  return std::monostate{};
}

exec::ResultTable result_from_json(const Json& j) {
  exec::ResultTable t;
  t.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& r : j.at("rows")) {
    std::vector<exec::Cell> row;
    for (const auto& c : r) row.push_back(cell_from_json(c));
    t.rows.push_back(std::move(row));
  }
  t.truncated = j.value("truncated", false);
  if (j.contains("row_limit_applied") && !j["row_limit_applied"].is_null()) {
    t.row_limit_applied = j["row_limit_applied"].get<std::size_t>();
  }
  return t;
}

sql::GuardReport guard_from_json(const Json& j) {
  sql::GuardReport r;
  r.read_only = j.value("read_only", false);
  r.single_statement = j.value("single_statement", false);
  r.schema_valid = j.value("schema_valid", false);
  r.limit_without_order_by = j.value("limit_without_order_by", false);
  for (const auto& v : j.value("violations", Json::array())) {
    r.violations.push_back({v.at("code").get<std::string>(), v.at("detail").get<std::string>()});
  }
  return r;
}

bank::RetrievalHit hit_from_json(const Json& j) {
  bank::RetrievalHit h;
  h.exemplar_id = j.at("exemplar_id").get<std::int64_t>();
  h.score = j.at("score").get<double>();
  h.where_pattern_hint = j.value("where_pattern_hint", "");
  h.question = j.value("question", "");
  h.sql = j.value("sql", "");
  return h;
}

pipeline::PipelineTrace trace_from_json(const Json& j) {
  pipeline::PipelineTrace t;
  t.trace_id = j.at("trace_id").get<std::string>();
  t.question = j.at("question").get<std::string>();
  t.strategy = pipeline::strategy_from_string(j.value("strategy", "fd")).value_or(pipeline::Strategy::Fd);
  t.k = j.value("k", std::size_t{0});
  const auto& d = j.at("decomposition");
  t.decomposition.question = d.value("question", t.question);
  t.decomposition.sub_questions = d.at("sub_questions").get<std::vector<std::string>>();
  for (const auto& r : j.value("retrievals", Json::array())) t.retrievals.push_back(hits_from_json(r));
  t.demonstrations = hits_from_json(j.value("demonstrations", Json::array()));
  t.reply = j.value("reply", "");
  t.synthesized_sql = j.value("synthesized_sql", "");
  if (j.contains("guard_report")) t.guard_report = guard_from_json(j["guard_report"]);
  if (j.contains("result") && !j["result"].is_null()) t.result = result_from_json(j["result"]);
  if (j.contains("confidence") && !j["confidence"].is_null()) {
    t.confidence = j["confidence"].get<double>();
  }
  if (j.contains("timings")) {
    for (const auto& [k, v] : j["timings"].items()) t.timings.push_back({k, v.get<double>()});
  }
  if (j.contains("error") && !j["error"].is_null()) {
    const auto& e = j["error"];
    t.error = pipeline::StageError{e.value("stage", ""), e.value("code", ""), e.value("message", "")};
  }
  t.created_at = j.value("created_at", "");
  return t;
}

}  // namespace fdnl2sql::service
