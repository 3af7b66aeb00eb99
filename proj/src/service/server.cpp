#include "fdnl2sql/service/server.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "fdnl2sql/sql/parser.hpp"
#include "fdnl2sql/sql/render.hpp"

namespace fdnl2sql::service {

namespace {

Response bad_request(const std::string& message) {
  return {400, error_body("bad_request", message)};
}

std::optional<Json> parse_body(const std::string& body) {
  try {
    auto j = Json::parse(body);
    if (!j.is_object()) return std::nullopt;
    return j;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<std::uint64_t> parse_uint(const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// Non-negative integer field, or nullopt when present with another type.
std::optional<std::uint64_t> uint_field(const Json& j, const char* key, std::uint64_t fallback,
                                        bool& ok) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  if (!j[key].is_number_unsigned() && !(j[key].is_number_integer() && j[key].get<std::int64_t>() >= 0)) {
    ok = false;
    return std::nullopt;
  }
  return j[key].get<std::uint64_t>();
}

std::string job_id(std::uint64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "job-%06llu", static_cast<unsigned long long>(n));
  return buf;
}

}  // namespace

Json error_body(const std::string& code, const std::string& message) {
  return Json{{"code", code}, {"message", message}};
}

Service::Service(const exec::Executor& db, bank::Bank& bank, const provider::Gateway& gw,
                 provider::PromptSet prompts, TraceStore& traces, ServiceConfig cfg)
    : db_(db),
      bank_(bank),
      gw_(gw),
      prompts_(prompts),
      traces_(traces),
      cfg_(std::move(cfg)),
      pipeline_(db, bank, gw, std::move(prompts), cfg_.pipeline) {}

Service::~Service() {
  stop_ = true;
  if (job_thread_.joinable()) job_thread_.join();
}

Response Service::query(const std::string& body) {
  auto j = parse_body(body);
  if (!j) return bad_request("body must be a JSON object");
  if (!j->contains("question") || !(*j)["question"].is_string()) {
    return bad_request("question must be a string");
  }
  auto question = std::string(util::trim((*j)["question"].get<std::string>()));
  if (question.empty()) return bad_request("question must not be empty");
  bool ok = true;
  auto k = uint_field(*j, "k", cfg_.default_k, ok);
  if (!ok || !k || *k == 0 || *k > cfg_.max_k) {
    return bad_request("k must be an integer in [1, " + std::to_string(cfg_.max_k) + "]");
  }
  auto strategy = pipeline::Strategy::Fd;
  if (j->contains("strategy") && !(*j)["strategy"].is_null()) {
    auto s = (*j)["strategy"].is_string()
                 ? pipeline::strategy_from_string((*j)["strategy"].get<std::string>())
                 : std::nullopt;
    if (!s) return bad_request("strategy must be one of fd, zero_shot, few_shot, cot");
    strategy = *s;
  }
  try {
    auto trace = pipeline_.answer(question, *k, strategy, traces_.next_id());
    traces_.put(trace);
    return {200, to_json(trace)};
  } catch (const provider::ProviderError& e) {
    return {503, error_body("provider_unreachable", e.what())};
  } catch (const Error& e) {
    return {500, error_body(e.code(), e.what())};
  }
}

Response Service::feedback(const std::string& body) {
  auto j = parse_body(body);
  if (!j) return bad_request("body must be a JSON object");
  if (!j->contains("trace_id") || !(*j)["trace_id"].is_string()) {
    return bad_request("trace_id must be a string");
  }
  if (!j->contains("action") || !(*j)["action"].is_string()) {
    return bad_request("action must be one of accept, modify, reject");
  }
  auto id = (*j)["trace_id"].get<std::string>();
  auto action = (*j)["action"].get<std::string>();
  if (action != "accept" && action != "modify" && action != "reject") {
    return bad_request("action must be one of accept, modify, reject");
  }
  std::optional<std::string> edited;
  if (j->contains("edited_sql") && !(*j)["edited_sql"].is_null()) {
    if (!(*j)["edited_sql"].is_string()) return bad_request("edited_sql must be a string");
    edited = (*j)["edited_sql"].get<std::string>();
  }
  if (action == "modify" && (!edited || util::trim(*edited).empty())) {
    return bad_request("modify requires edited_sql");
  }
  auto trace = traces_.get(id);
  if (!trace) return {404, error_body("unknown_trace", "no trace " + id)};

  FeedbackRecord rec{id, action, action == "modify" ? edited : std::nullopt, std::nullopt, {}};
  Json out{{"status", "ok"}, {"action", action}};
  if (action == "reject") {
    traces_.add_feedback(rec);
    return {200, out};
  }

  std::string sql_text = action == "accept" ? trace->synthesized_sql : *edited;
  sql::SqlQuery q;
  try {
    q = sql::parse_sql(sql_text);
  } catch (const Error& e) {
    return {422, error_body(e.code(), e.what())};
  }
  auto report = sql::guard(q, db_.schema());
  if (!report.passes()) {
    auto b = error_body("guard_failed", "the SQL does not pass the guard");
    b["guard_report"] = to_json(report);
    return {422, b};
  }
  if (action == "modify") {
    try {
      db_.execute(q, cfg_.pipeline.exec);
    } catch (const Error& e) {
      return {422, error_body(e.code(), e.what())};
    }
  }

  bank::Exemplar e;
  e.question = trace->question;
  e.sql = sql::normalize_sql(q);
  if (action == "accept") e.decomposition = trace->decomposition.sub_questions;
  e.source = bank::Source::Approved;
  try {
    e.embedding = gw_.embed(trace->question);
    auto added = bank_.add(std::move(e));
    rec.exemplar_id = added.id;
    out["exemplar_id"] = added.id;
    out["inserted"] = added.inserted;
  } catch (const provider::ProviderError& err) {
    return {503, error_body("provider_unreachable", err.what())};
  } catch (const Error& err) {
    return {422, error_body(err.code(), err.what())};
  }
  traces_.add_feedback(rec);
  return {200, out};
}

Response Service::exemplars(const Params& params) const {
  std::optional<bank::Source> source;
  std::uint64_t limit = 50, offset = 0;
  for (const auto& [key, value] : params) {
    if (key == "source") {
      if (value.empty()) continue;
      source = bank::source_from_string(value);
      if (!source) return bad_request("source must be seed, approved or augmented");
    } else if (key == "limit") {
      auto v = parse_uint(value);
      if (!v || *v == 0 || *v > 1000) return bad_request("limit must be an integer in [1, 1000]");
      limit = *v;
    } else if (key == "offset") {
      auto v = parse_uint(value);
      if (!v) return bad_request("offset must be a non-negative integer");
      offset = *v;
    }
  }
  auto all = bank_.snapshot();
  std::vector<bank::Exemplar> picked;
  for (auto& e : all) {
    if (!source || e.source == *source) picked.push_back(std::move(e));
  }
  std::stable_sort(picked.begin(), picked.end(), [](const auto& a, const auto& b) {
    return a.created_at != b.created_at ? a.created_at < b.created_at : a.id < b.id;
  });
  Json items = Json::array();
  for (std::size_t i = offset; i < picked.size() && items.size() < limit; ++i) {
    items.push_back(to_json(picked[i]));
  }
  return {200, Json{{"items", std::move(items)},
                    {"total", picked.size()},
                    {"limit", limit},
                    {"offset", offset}}};
}

Response Service::start_augment(const std::string& body) {
  auto j = parse_body(body);
  if (!j) return bad_request("body must be a JSON object");
  bool ok = true;
  auto batch = uint_field(*j, "batch", 5, ok);
  auto seed = uint_field(*j, "seed", 0, ok);
  if (!ok || !batch || !seed || *batch > 1000) {
    return bad_request("batch must be an integer in [0, 1000] and seed a non-negative integer");
  }
  augment::GrowOptions opts;
  opts.batch = *batch;
  opts.seed = *seed;
  opts.timeout_ms = cfg_.pipeline.exec.timeout_ms;
  opts.stop = &stop_;
  if (j->contains("kinds") && !(*j)["kinds"].is_null()) {
    const auto& kinds = (*j)["kinds"];
    if (!kinds.is_array()) return bad_request("kinds must be an array of mutation kinds");
    opts.kinds.clear();
    for (const auto& k : kinds) {
      auto kind = k.is_string() ? augment::kind_from_string(k.get<std::string>()) : std::nullopt;
      if (!kind) return bad_request("unknown mutation kind " + dump(k));
      opts.kinds.push_back(*kind);
    }
    if (opts.kinds.empty()) opts.kinds = augment::all_kinds();
  }

  std::lock_guard lock(job_mu_);
  if (job_running_) return {409, error_body("job_running", "an augment job is already running")};
  if (job_thread_.joinable()) job_thread_.join();
  auto job = std::make_shared<Job>();
  job->id = job_id(++job_counter_);
  jobs_[job->id] = job;
  job_running_ = true;
  job_thread_ = std::thread([this, job, opts] {
    augment::AugmentReport report;
    std::string status = "done", error;
    try {
      report = augment::grow_bank(bank_, db_, gw_, prompts_, opts);
    } catch (const std::exception& e) {
      status = "failed";
      error = e.what();
    }
    std::lock_guard l(job_mu_);
    job->report = std::move(report);
    job->error = std::move(error);
    job->status = std::move(status);
    job_running_ = false;
  });
  return {202, Json{{"job_id", job->id}, {"status", "running"}}};
}

Response Service::augment_status(const std::string& id) const {
  std::lock_guard lock(job_mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return {404, error_body("unknown_job", "no job " + id)};
  const auto& job = *it->second;
  Json j{{"job_id", job.id}, {"status", job.status}};
  j["report"] = to_json(job.report);
  if (!job.error.empty()) j["error"] = job.error;
  return {200, j};
}

void Service::wait_for_job() {
  std::thread t;
  {
    std::lock_guard lock(job_mu_);
    t = std::move(job_thread_);
  }
  if (t.joinable()) t.join();
}

Response Service::schema() const { return {200, to_json(db_.schema())}; }

Response Service::trace(const std::string& id) const {
  auto j = traces_.get_json(id);
  if (!j) return {404, error_body("unknown_trace", "no trace " + id)};
  return {200, *j};
}

Response Service::execute(const std::string& body) const {
  auto j = parse_body(body);
  if (!j) return bad_request("body must be a JSON object");
  if (!j->contains("sql") || !(*j)["sql"].is_string()) return bad_request("sql must be a string");
  sql::SqlQuery q;
  try {
    q = sql::parse_sql((*j)["sql"].get<std::string>());
  } catch (const Error& e) {
    return {422, error_body(e.code(), e.what())};
  }
  auto report = sql::guard(q, db_.schema());
  if (!report.passes()) {
    auto b = error_body("guard_failed", "the SQL does not pass the guard");
    b["guard_report"] = to_json(report);
    return {422, b};
  }
  try {
    auto out = to_json(db_.execute(q, cfg_.pipeline.exec));
    out["guard_report"] = to_json(report);
    return {200, out};
  } catch (const Error& e) {
    return {422, error_body(e.code(), e.what())};
  }
}

Response Service::health() const {
  return {200, Json{{"status", "ok"},
                    {"bank_size", bank_.size()},
                    {"db_fingerprint", db_.schema().fingerprint}}};
}

void Service::mount(httplib::Server& server) {
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(dump(r.body), "application/json");
  };
  auto params = [](const httplib::Request& req) {
    Params p;
    for (const auto& [k, v] : req.params) p.emplace(k, v);
    return p;
  };

  server.set_default_headers({{"Access-Control-Allow-Origin", cfg_.cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  server.Post("/api/query", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, query(req.body));
  });
  server.Post("/api/feedback", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, feedback(req.body));
  });
  server.Get("/api/exemplars", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, exemplars(params(req)));
  });
  server.Post("/api/augment", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, start_augment(req.body));
  });
  server.Get(R"(/api/augment/([^/]+))",
             [=, this](const httplib::Request& req, httplib::Response& res) {
               reply(res, augment_status(req.matches[1]));
             });
  server.Get("/api/schema", [=, this](const httplib::Request&, httplib::Response& res) {
    reply(res, schema());
  });
  server.Get(R"(/api/traces/([^/]+))",
             [=, this](const httplib::Request& req, httplib::Response& res) {
               reply(res, trace(req.matches[1]));
             });
  server.Post("/api/execute", [=, this](const httplib::Request& req, httplib::Response& res) {
    reply(res, execute(req.body));
  });
  server.Get("/api/health", [=, this](const httplib::Request&, httplib::Response& res) {
    reply(res, health());
  });
  server.set_error_handler([=](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    reply(res, {res.status, error_body(res.status == 404 ? "not_found" : "http_error",
                                       httplib::status_message(res.status))});
  });
  server.set_exception_handler(
      [=](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "unexpected failure";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        reply(res, {500, error_body("internal_error", what)});
      });
}

}  // namespace fdnl2sql::service
