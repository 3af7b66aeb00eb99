// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cli_runner.hpp"
#include "edit_diff.hpp"
#include "fdnl2sql/metrics/evaluate.hpp"
#include "fdnl2sql/metrics/metrics.hpp"
#include "fdnl2sql/service/server.hpp"
#include "fdnl2sql/sql/guard.hpp"
#include "fdnl2sql/sql/parser.hpp"
#include "fdnl2sql/sql/render.hpp"
#include "live_server.hpp"
#include "metric_fixture.hpp"
#include "retrieval_oracle.hpp"
#include "sqlite_helpers.hpp"
#include "support.hpp"

using namespace fdnl2sql;
using Json = nlohmann::ordered_json;

namespace {

constexpr double kMetricTol = 1e-6;
constexpr double kMetricBudgetS = 10.0;
constexpr double kAstExpected = 86.67;
constexpr double kAstTol = 0.01;
constexpr std::size_t kGuardMinCases = 20;
constexpr std::size_t kBenchMinVariants = 50;
constexpr double kBenchBudgetS = 60.0;
constexpr int kRetrievalTrials = 1000;
constexpr std::size_t kRetrievalMaxBank = 200;
constexpr int kFuzzQuestions = 200;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

std::vector<Json> read_jsonl(const std::string& path) {
  std::vector<Json> out;
  std::istringstream in(testsupport::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!util::trim(line).empty()) out.push_back(Json::parse(line));
  }
  return out;
}

Outcome metric_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  const auto& db = *testsupport::toy().exec;
  auto cases = testsupport::load_metric_cases(FDNL2SQL_TEST_DATA "/metric_oracle.json");
  double worst = 0.0;
  std::size_t bad = 0;
  for (const auto& c : cases) {
    auto s = metrics::run_sample(db, c.pred_sql, c.gold_sql);
    auto ast = metrics::ast_similarity(c.pred_sql, c.gold_sql);
    if (!s.pred || !ast) {
      ++bad;
      continue;
    }
    for (double d : {metrics::execution_exact_match(*s.pred, s.gold) - c.eem,
                     metrics::execution_f1(*s.pred, s.gold) - c.ef1,
                     metrics::chrf(*s.pred, s.gold) - c.chrf, *ast - c.ast}) {
      worst = std::max(worst, std::abs(d));
    }
  }
  double secs = seconds_since(t0);
  bool ok = cases.size() >= 50 && bad == 0 && worst <= kMetricTol && secs < kMetricBudgetS;
  return {ok, std::to_string(cases.size()) + " pairs, max |diff| " + fmt(worst) + " (tol 1e-6), " +
                  std::to_string(bad) + " unscorable, " + fmt(secs, 3) + " s (budget 10 s)"};
}

Outcome ast_example() {
  auto s = metrics::ast_similarity("SELECT a FROM t WHERE x = 1", "SELECT a FROM t WHERE y = 1");
  bool ok = s && std::abs(*s - kAstExpected) <= kAstTol;
  return {ok, "score " + (s ? fmt(*s, 8) : std::string("none")) + ", expected 86.67 +/- 0.01"};
}

Outcome guard_suite() {
  const auto& toy = testsupport::toy();
  auto cases = read_jsonl(FDNL2SQL_TEST_DATA "/guard_cases.jsonl");
  std::size_t matched = 0, sqlite_agree = 0, sqlite_checked = 0;
  std::set<std::string> covered;
  std::string first_miss;
  for (const auto& c : cases) {
    auto sql = c["sql"].get<std::string>();
    auto want = c["flags"].get<std::vector<std::string>>();
    std::sort(want.begin(), want.end());
    covered.insert(want.begin(), want.end());
    std::vector<std::string> got;
    sql::GuardReport r;
    try {
      r = sql::guard(sql::parse_sql(sql), toy.schema);
      got = r.flags();
    } catch (const Error& e) {
      got = {std::string("parse:") + e.code()};
    }
    if (got == want) {
      ++matched;
    } else if (first_miss.empty()) {
      first_miss = sql;
    }
    // Second route for name resolution: SQLite's own prepare step.
    bool name_case = std::all_of(want.begin(), want.end(), [](const std::string& f) {
      return f == "unknown_column" || f == "unknown_table" || f == "ambiguous_column" ||
             f == "limit_without_order_by";
    });
    if (name_case) {
      ++sqlite_checked;
      bool schema_ok = std::none_of(want.begin(), want.end(), [](const std::string& f) {
        return f != "limit_without_order_by";
      });
      if (testsupport::sqlite_prepares(toy.path, sql) == schema_ok) ++sqlite_agree;
    }
  }
  bool coverage = covered.count("non_read_only") && covered.count("multiple_statements") &&
                  covered.count("unknown_column") && covered.count("limit_without_order_by");
  bool ok = cases.size() >= kGuardMinCases && matched == cases.size() && coverage &&
            sqlite_agree == sqlite_checked;
  std::string d = std::to_string(matched) + "/" + std::to_string(cases.size()) +
                  " flag sets exact, SQLite prepare agrees on " + std::to_string(sqlite_agree) +
                  "/" + std::to_string(sqlite_checked);
  if (!first_miss.empty()) d += ", first mismatch: " + first_miss;
  return {ok, d};
}

Outcome augmentation_validity() {
  testsupport::TempDir dir;
  auto db = dir.file("toy.db"), seeds = dir.file("seeds.jsonl"), out = dir.file("bench.jsonl");
  if (testsupport::run_cli({"init-toy-db", "--seed", "42", "--out", db, "--seeds-out", seeds})
          .exit_code != 0) {
    return {false, "init-toy-db failed"};
  }
  auto seed_count = read_jsonl(seeds).size();
  auto t0 = std::chrono::steady_clock::now();
  auto r = testsupport::run_cli({"bench-expand", "--db", db, "--seeds", seeds, "--out", out});
  double secs = seconds_since(t0);
  if (r.exit_code != 0) return {false, "bench-expand exited " + std::to_string(r.exit_code)};
  auto report = Json::parse(r.out);
  auto entries = read_jsonl(out);

  std::size_t valid = 0, single_edit = 0;
  for (const auto& e : entries) {
    auto sql_text = e["sql"].get<std::string>();
    bool parses = false;
    try {
      auto v = sql::parse_sql(sql_text);
      auto p = sql::parse_sql(e["parent_sql"].get<std::string>());
      parses = true;
      if (testsupport::edit_sites(*p.statements[0].select, *v.statements[0].select) == 1) {
        ++single_edit;
      }
    } catch (const Error&) {
    }
    if (parses && testsupport::sqlite_prepares(db, sql_text) &&
        !testsupport::sqlite_column(db, sql_text).empty()) {
      ++valid;
    }
  }
  auto n = entries.size();
  auto tally = [&](const char* k) { return report[k].get<std::size_t>(); };
  bool conserved = tally("attempted") == tally("retained") + tally("discarded_error") +
                                             tally("discarded_empty") +
                                             tally("discarded_duplicate");
  for (const auto& [kind, t] : report["per_kind_tally"].items()) {
    conserved = conserved && t["attempted"] == t["retained"].get<std::size_t>() +
                                                   t["discarded_error"].get<std::size_t>() +
                                                   t["discarded_empty"].get<std::size_t>() +
                                                   t["discarded_duplicate"].get<std::size_t>();
  }
  bool ok = seed_count == 25 && n >= kBenchMinVariants && valid == n && single_edit == n &&
            conserved && report["entries"] == n && secs < kBenchBudgetS;
  return {ok, std::to_string(seed_count) + " seeds -> " + std::to_string(n) +
                  " variants (min 50), re-exec ok " + std::to_string(valid) + "/" +
                  std::to_string(n) + ", one edit site " + std::to_string(single_edit) + "/" +
                  std::to_string(n) + ", conservation " + (conserved ? "holds" : "broken") +
                  ", " + fmt(secs, 3) + " s (budget 60 s)"};
}

Outcome retrieval_exactness() {
  std::mt19937_64 g(20260301);
  provider::TrigramEmbedder emb(64);
  const std::vector<std::string> words = {"phase", "melanoma", "trials", "recruiting", "nsclc",
                                          "pd-1",  "after",    "2018",   "enrollment", "which",
                                          "how",   "many",     "ctla-4", "completed",  "median"};
  auto sentence = [&] {
    std::string s;
    auto n = 1 + g() % 6;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + words[g() % words.size()];
    return s;
  };
  int exact = 0;
  std::size_t ties_seen = 0;
  for (int trial = 0; trial < kRetrievalTrials; ++trial) {
    auto bank = bank::Bank::in_memory();
    std::size_t n = 1 + g() % kRetrievalMaxBank;
    std::vector<std::vector<double>> vecs;
    std::vector<std::int64_t> ids;
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < n; ++i) {
      // Repeated questions give identical vectors, so ties are common.
      auto q = (!texts.empty() && g() % 4 == 0) ? texts[g() % texts.size()] : sentence();
      bank::Exemplar e;
      e.question = q;
      e.sql = "SELECT " + std::to_string(i);
      e.embedding = emb.embed(q);
      auto added = bank.add(e);
      vecs.push_back(e.embedding);
      ids.push_back(added.id);
      texts.push_back(q);
    }
    auto q = emb.embed(sentence());
    std::size_t k = 1 + g() % 10;
    auto hits = bank.retrieve(q, k);
    auto want = testsupport::brute_force_top_k(vecs, ids, q, k);
    bool same = hits.size() == want.size();
    for (std::size_t i = 0; same && i < hits.size(); ++i) {
      same = hits[i].exemplar_id == want[i].id && hits[i].score == want[i].score;
      if (i > 0 && want[i].score == want[i - 1].score) ++ties_seen;
    }
    exact += same;
  }
  return {exact == kRetrievalTrials,
          std::to_string(exact) + "/" + std::to_string(kRetrievalTrials) +
              " random banks match the exhaustive scan (" + std::to_string(ties_seen) +
              " tied neighbours exercised)"};
}

/// One scripted feedback scenario on a fresh bank; returns a transcript
/// so two runs can be compared.
struct ScenarioRun {
  bool ok = false;
  std::string why;
  std::string transcript;
};

Json strip_volatile(Json j) {
  j.erase("timings");
  j.erase("created_at");
  return j;
}

ScenarioRun feedback_scenario(const std::string& action) {
  const std::string question = "How many trials are there for each ICI class?";
  const std::string novel = "SELECT ici_class, count(*) AS n FROM trials GROUP BY ici_class";
  auto mock = std::make_shared<provider::MockProvider>();
  mock->rule(provider::PromptKind::Synthesize, question, "```sql\n" + novel + "\n```");
  auto gw = testsupport::mock_gateway(mock);
  auto bank = testsupport::seeded_bank(gw);
  service::TraceStore traces;
  service::Service svc(*testsupport::toy().exec, bank, gw, provider::PromptSet::defaults(), traces);
  testsupport::LiveServer live(svc);
  auto c = live.client();
  ScenarioRun run;
  auto before = bank.size();

  auto q1 = c.Post("/api/query", Json{{"question", question}, {"k", 3}}.dump(), "application/json");
  if (!q1 || q1->status != 200) return {false, "query failed", ""};
  auto t1 = Json::parse(q1->body);
  run.transcript += strip_volatile(t1).dump() + "\n";
  auto id = t1["trace_id"].get<std::string>();

  Json fb{{"trace_id", id}, {"action", action}};
  const std::string edit = "select ici_class, avg(enrollment) as mean_enrollment from trials group by ici_class";
  if (action == "modify") fb["edited_sql"] = edit;
  auto f = c.Post("/api/feedback", fb.dump(), "application/json");
  if (!f || f->status != 200) return {false, "feedback returned " + std::to_string(f ? f->status : -1), ""};
  auto fj = Json::parse(f->body);
  run.transcript += fj.dump() + "\n";

  if (action == "accept") {
    if (fj["inserted"] != true || bank.size() != before + 1) return {false, "accept did not add an exemplar", ""};
    auto new_id = fj["exemplar_id"].get<std::int64_t>();
    auto q2 = c.Post("/api/query", Json{{"question", question}, {"k", 3}}.dump(), "application/json");
    auto t2 = Json::parse(q2->body);
    run.transcript += strip_volatile(t2).dump() + "\n";
    bool found = false;
    for (const auto& bundle : t2["retrievals"]) {
      for (const auto& h : bundle) found |= h["exemplar_id"] == new_id;
    }
    run.ok = found;
    if (!found) run.why = "re-query did not retrieve exemplar " + std::to_string(new_id);
  } else if (action == "modify") {
    auto e = bank.get(fj["exemplar_id"].get<std::int64_t>());
    auto normal = sql::normalize_sql(sql::parse_sql(edit));
    run.ok = e && e->source == bank::Source::Approved && e->sql == normal && bank.size() == before + 1;
    if (!run.ok) run.why = "stored exemplar does not carry the edit's normal form";
  } else {
    run.ok = bank.size() == before && traces.feedback(id).size() == 1;
    if (!run.ok) run.why = "reject changed the bank";
  }
  return run;
}

Outcome feedback_loop() {
  int passed = 0;
  std::string why;
  for (const char* action : {"accept", "modify", "reject"}) {
    auto a = feedback_scenario(action);
    auto b = feedback_scenario(action);
    bool ok = a.ok && b.ok && a.transcript == b.transcript;
    if (ok) {
      ++passed;
    } else if (why.empty()) {
      why = std::string(action) + ": " + (a.why.empty() ? (b.why.empty() ? "runs differ" : b.why) : a.why);
    }
  }
  return {passed == 3, std::to_string(passed) + "/3 scenarios pass twice with identical transcripts" +
                           (why.empty() ? "" : " (" + why + ")")};
}

Outcome pipeline_safety() {
  testsupport::TempDir dir;
  auto path = dir.file("toy.db");
  std::filesystem::copy_file(testsupport::toy().path, path);
  auto bytes_before = testsupport::read_file(path);
  exec::Executor db(path, testsupport::toy().schema);
  std::vector<std::string> executed;
  std::mutex mu;
  db.set_audit([&](const std::string& s) {
    std::lock_guard lock(mu);
    executed.push_back(s);
  });

  const std::vector<std::string> replies = {
      "```sql\nDROP TABLE trials\n```",
      "DELETE FROM trials",
      "```sql\nSELECT nct_id FROM trials; DROP TABLE trials\n```",
      "SELECT 1; UPDATE trials SET phase = 0",
      "UPDATE trials SET status = 'x' WHERE 1",
      "INSERT INTO trials (nct_id) VALUES ('NCT_FAKE')",
      "ATTACH DATABASE '/tmp/evil.db' AS evil",
      "PRAGMA writable_schema = ON",
      "CREATE TABLE pwned (a)",
      "```sql\nSELECT secret FROM users\n```",
      "SELECT sponsor FROM trials",
      "lorem ipsum dolor sit amet",
      "```\n\xff\xfe garbage \x01\n```",
      "",
      "SELECT",
      "```sql\nSELECT nct_id FROM trials WHERE phase = 3\n```",
      "SELECT count(*) FROM trials",
      "WITH RECURSIVE r(x) AS (SELECT 1 UNION ALL SELECT x + 1 FROM r) SELECT x FROM r",
      "SELECT abs(1, 2) FROM trials",
      "Sure! The query is:\nSELECT cancer_type FROM trials LIMIT 3",
  };
  std::mt19937_64 g(777);
  auto mock = std::make_shared<provider::MockProvider>();
  mock->responder([&](const provider::GenerationRequest& req) -> std::optional<std::string> {
    auto h = util::fnv1a64(req.prompt);
    if (h % 23 == 0) throw provider::ProviderError("simulated outage");
    if (req.task == provider::PromptKind::Decompose) {
      return h % 3 == 0 ? std::string("DROP TABLE trials\n- ; DELETE FROM trials") : std::string("- part one\n- part two");
    }
    return replies[h % replies.size()];
  });
  auto gw = testsupport::mock_gateway(mock);
  auto bank = testsupport::seeded_bank(gw);
  service::TraceStore traces;
  service::ServiceConfig cfg;
  cfg.pipeline.exec.timeout_ms = 500;
  service::Service svc(db, bank, gw, provider::PromptSet::defaults(), traces, cfg);
  testsupport::LiveServer live(svc);
  auto c = live.client();

  const std::vector<std::string> strategies = {"fd", "zero_shot", "few_shot", "cot"};
  std::map<int, int> statuses;
  int fivexx = 0;
  std::string first_5xx;
  for (int i = 0; i < kFuzzQuestions; ++i) {
    std::string q = "question " + std::to_string(i) + " '; DROP TABLE trials; -- " + std::to_string(g());
    if (i % 17 == 0) q = "";
    if (i % 19 == 0) q = std::string(2000, 'x');
    Json body{{"question", q}, {"strategy", strategies[g() % strategies.size()]}, {"k", 1 + g() % 8}};
    auto r = c.Post("/api/query", body.dump(), "application/json");
    int status = r ? r->status : -1;
    ++statuses[status];
    if (status >= 500 && status != 503) {
      ++fivexx;
      if (first_5xx.empty()) first_5xx = r->body;
    }
    if (status == 200) {
      auto id = Json::parse(r->body)["trace_id"].get<std::string>();
      auto f = c.Post("/api/feedback", Json{{"trace_id", id}, {"action", "accept"}}.dump(),
                      "application/json");
      int fs = f ? f->status : -1;
      ++statuses[1000 + fs];
      if (fs >= 500 && fs != 503) ++fivexx;
    }
    if (status < 0) ++fivexx;
  }

  std::size_t unsafe = 0;
  for (const auto& s : executed) {
    try {
      if (!sql::guard(sql::parse_sql(s), db.schema()).passes()) ++unsafe;
    } catch (const Error&) {
      ++unsafe;
    }
  }
  bool unchanged = testsupport::read_file(path) == bytes_before;
  std::string hist;
  for (const auto& [s, n] : statuses) {
    hist += (hist.empty() ? "" : " ") + (s >= 1000 ? "fb" + std::to_string(s - 1000) : std::to_string(s)) +
            "x" + std::to_string(n);
  }
  bool ok = unsafe == 0 && fivexx == 0 && unchanged && statuses[200] > 0 && statuses[503] > 0;
  return {ok, std::to_string(kFuzzQuestions) + " questions, " + std::to_string(executed.size()) +
                  " executions, " + std::to_string(unsafe) + " guard-failing, " +
                  std::to_string(fivexx) + " unexpected 5xx, db " +
                  (unchanged ? "unchanged" : "MODIFIED") + " [" + hist + "]" +
                  (first_5xx.empty() ? "" : " first 5xx: " + first_5xx)};
}

Outcome determinism() {
  auto workspace = [](const testsupport::TempDir& d) {
    auto ok = testsupport::run_cli({"init-toy-db", "--seed", "42", "--out", d.file("toy.db"),
                                    "--seeds-out", d.file("seeds.jsonl"), "--bank-out",
                                    d.file("bank.jsonl")});
    return ok.exit_code == 0;
  };
  auto bank_lines = [](const std::string& path) {
    std::string out;
    for (auto j : read_jsonl(path)) {
      j.erase("created_at");
      out += j.dump() + "\n";
    }
    return out;
  };
  testsupport::TempDir a, b;
  if (!workspace(a) || !workspace(b)) return {false, "init-toy-db failed"};
  std::vector<std::string> failed;
  const std::string q = "Which phase 3 melanoma trials, started after 2018 and recruiting?";
  for (const char* s : {"fd", "zero_shot", "few_shot", "cot"}) {
    auto x = testsupport::run_cli({"ask", q, "--db", a.file("toy.db"), "--bank", a.file("bank.jsonl"), "--strategy", s});
    auto y = testsupport::run_cli({"ask", q, "--db", b.file("toy.db"), "--bank", b.file("bank.jsonl"), "--strategy", s});
    if (x.exit_code != 0 || x.out != y.out) failed.push_back(std::string("ask/") + s);
  }
  auto x = testsupport::run_cli({"bench-expand", "--db", a.file("toy.db"), "--seeds", a.file("seeds.jsonl"), "--out", a.file("bench.jsonl"), "--seed", "5"});
  auto y = testsupport::run_cli({"bench-expand", "--db", b.file("toy.db"), "--seeds", b.file("seeds.jsonl"), "--out", b.file("bench.jsonl"), "--seed", "5"});
  if (x.exit_code != 0 || x.out != y.out ||
      testsupport::read_file(a.file("bench.jsonl")) != testsupport::read_file(b.file("bench.jsonl"))) {
    failed.push_back("bench-expand");
  }
  x = testsupport::run_cli({"augment", "--db", a.file("toy.db"), "--bank", a.file("bank.jsonl"), "--batch", "6", "--seed", "11"});
  y = testsupport::run_cli({"augment", "--db", b.file("toy.db"), "--bank", b.file("bank.jsonl"), "--batch", "6", "--seed", "11"});
  if (x.exit_code != 0 || x.out != y.out ||
      bank_lines(a.file("bank.jsonl")) != bank_lines(b.file("bank.jsonl"))) {
    failed.push_back("augment");
  }
  return {failed.empty(), failed.empty() ? "ask (4 strategies), bench-expand and augment byte-identical across two runs"
                                         : "differs: " + util::join(failed, ", ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric-oracle-equivalence", metric_oracle},
      {"ast-worked-example", ast_example},
      {"guard-flag-suite", guard_suite},
      {"augmentation-validity", augmentation_validity},
      {"retrieval-exactness", retrieval_exactness},
      {"feedback-loop", feedback_loop},
      {"pipeline-safety", pipeline_safety},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria pass" << std::endl;
  return failures ? 1 : 0;
}
