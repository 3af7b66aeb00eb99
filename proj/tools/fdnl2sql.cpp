#include <httplib.h>

#include <CLI11.hpp>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "fdnl2sql/augment/augmenter.hpp"
#include "fdnl2sql/bank/bank.hpp"
#include "fdnl2sql/exec/executor.hpp"
#include "fdnl2sql/metrics/evaluate.hpp"
#include "fdnl2sql/pipeline/pipeline.hpp"
#include "fdnl2sql/provider/gateway.hpp"
#include "fdnl2sql/provider/prompts.hpp"
#include "fdnl2sql/schema/schema.hpp"
#include "fdnl2sql/schema/toy_db.hpp"
#include "fdnl2sql/service/json_io.hpp"
#include "fdnl2sql/service/server.hpp"
#include "fdnl2sql/service/trace_store.hpp"

using namespace fdnl2sql;
using service::Json;

namespace {

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

struct ProviderFlags {
  std::string provider_url;
  std::string embed_url;

  provider::ProviderConfig config() const {
    auto cfg = provider::ProviderConfig::from_env();
    if (!provider_url.empty()) cfg.provider_url = provider_url;
    if (!embed_url.empty()) cfg.embed_url = embed_url;
    return cfg;
  }
};

void add_provider_flags(CLI::App* cmd, ProviderFlags& f) {
  cmd->add_option("--provider-url", f.provider_url,
                  "OpenAI-compatible generation endpoint (default: in-process mock)");
  cmd->add_option("--embed-url", f.embed_url,
                  "OpenAI-compatible embedding endpoint (default: hashed trigrams)");
}

std::vector<Json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot read " + path);
  std::vector<Json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (util::trim(line).empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const std::exception& e) {
      throw Error("io_error", path + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<schema::SeedPair> read_seeds(const std::string& path) {
  std::vector<schema::SeedPair> out;
  for (const auto& j : read_jsonl(path)) {
    out.push_back({j.at("question").get<std::string>(), j.at("sql").get<std::string>()});
  }
  return out;
}

std::vector<augment::MutationKind> parse_kinds(const std::string& csv) {
  std::vector<augment::MutationKind> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto name = std::string(util::trim(item));
    if (name.empty()) continue;
    auto k = augment::kind_from_string(name);
    if (!k) throw Error("bad_argument", "unknown mutation kind '" + name + "'");
    out.push_back(*k);
  }
  return out;
}

int init_toy_db(std::uint64_t seed, const std::string& out, const std::string& seeds_out,
                const std::string& bank_out, bool force, const ProviderFlags& pf) {
  schema::generate_toy_db(seed, out);
  std::cout << "wrote " << out << " (" << schema::kToyRowCount << " trials)\n";
  if (!seeds_out.empty()) {
    std::ofstream f(seeds_out, std::ios::trunc);
    if (!f) throw Error("io_error", "cannot write " + seeds_out);
    for (const auto& s : schema::toy_seed_pairs()) {
      f << Json{{"question", s.question}, {"sql", s.sql}}.dump() << "\n";
    }
    std::cout << "wrote " << seeds_out << " (" << schema::toy_seed_pairs().size()
              << " seed pairs)\n";
  }
  if (!bank_out.empty()) {
    if (std::filesystem::exists(bank_out)) {
      if (!force) throw Error("bad_argument", bank_out + " exists (use --force to replace it)");
      std::filesystem::remove(bank_out);
    }
    auto gw = provider::make_gateway(pf.config());
    auto bank = bank::Bank::open(bank_out);
    for (const auto& s : schema::toy_seed_pairs()) {
      bank::Exemplar e;
      e.question = s.question;
      e.sql = s.sql;
      e.embedding = gw.embed(s.question);
      e.source = bank::Source::Seed;
      bank.add(std::move(e));
    }
    std::cout << "wrote " << bank_out << " (" << bank.size() << " exemplars)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feedback-driven NL2SQL assistant for SQLite databases"};
  app.require_subcommand(1);

  ProviderFlags pf;
  std::string db, bank_path, out, seeds, pairs, csv, strategy = "fd", kinds, host = "127.0.0.1",
                                                     traces_path, cors = "*", question;
  std::uint64_t seed = 42;
  std::size_t k = 5, batch = 5, per_seed = 3;
  int port = 8080, timeout_ms = 5000;
  bool timings = false, force = false;
  std::string seeds_out, bank_out;

  auto* init = app.add_subcommand("init-toy-db", "Generate the synthetic clinical-trials database");
  init->add_option("--seed", seed, "Generator seed")->capture_default_str();
  init->add_option("--out", out, "Database path")->required();
  init->add_option("--seeds-out", seeds_out, "Also write the seed question/SQL pairs (JSONL)");
  init->add_option("--bank-out", bank_out, "Also create an exemplar bank holding the seed pairs");
  init->add_flag("--force", force, "Replace an existing bank file");
  add_provider_flags(init, pf);

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--db", db)->required();
  serve->add_option("--bank", bank_path)->required();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--traces", traces_path, "Trace log (default: <bank>.traces.jsonl)");
  serve->add_option("--cors-origin", cors)->capture_default_str();
  serve->add_option("--timeout-ms", timeout_ms)->capture_default_str();
  add_provider_flags(serve, pf);

  auto* ask = app.add_subcommand("ask", "Answer one question and print the trace as JSON");
  ask->add_option("question", question)->required();
  ask->add_option("--db", db)->required();
  ask->add_option("--bank", bank_path)->required();
  ask->add_option("--strategy", strategy, "fd, zero_shot, few_shot or cot")->capture_default_str();
  ask->add_option("-k", k, "Exemplars per retrieval")->capture_default_str();
  ask->add_flag("--timings", timings, "Include per-stage timings and the timestamp");
  ask->add_option("--timeout-ms", timeout_ms)->capture_default_str();
  add_provider_flags(ask, pf);

  auto* eval = app.add_subcommand("eval", "Score predicted SQL against gold SQL");
  eval->add_option("--db", db)->required();
  eval->add_option("--pairs", pairs, "JSONL of {question, gold_sql, pred_sql}")->required();
  eval->add_option("--csv", csv, "Per-sample CSV output");
  eval->add_option("--strategy", strategy,
                   "Generate missing pred_sql with this strategy (needs --bank)");
  eval->add_option("--bank", bank_path);
  eval->add_option("-k", k)->capture_default_str();
  eval->add_option("--timeout-ms", timeout_ms)->capture_default_str();
  add_provider_flags(eval, pf);

  auto* aug = app.add_subcommand("augment", "Grow the bank with mutated, back-translated variants");
  aug->add_option("--db", db)->required();
  aug->add_option("--bank", bank_path)->required();
  aug->add_option("--batch", batch)->capture_default_str();
  aug->add_option("--seed", seed)->capture_default_str();
  aug->add_option("--kinds", kinds, "Comma-separated mutation kinds");
  aug->add_option("--timeout-ms", timeout_ms)->capture_default_str();
  add_provider_flags(aug, pf);

  auto* bench = app.add_subcommand("bench-expand", "Expand seed pairs into a benchmark file");
  bench->add_option("--db", db)->required();
  bench->add_option("--seeds", seeds, "JSONL of {question, sql}")->required();
  bench->add_option("--out", out)->required();
  bench->add_option("--per-seed", per_seed)->capture_default_str();
  bench->add_option("--seed", seed)->capture_default_str();
  bench->add_option("--kinds", kinds, "Comma-separated mutation kinds (default: all)");
  bench->add_option("--timeout-ms", timeout_ms)->capture_default_str();
  add_provider_flags(bench, pf);

  CLI11_PARSE(app, argc, argv);

  try {
    if (init->parsed()) return init_toy_db(seed, out, seeds_out, bank_out, force, pf);

    auto cfg = pf.config();
    auto gw = provider::make_gateway(cfg);
    auto prompts = provider::PromptSet::load(cfg.prompt_dir);
    exec::Executor executor(db, schema::introspect(db));
    exec::ExecOptions eopts;
    eopts.timeout_ms = timeout_ms;

    if (serve->parsed()) {
      auto bank = bank::Bank::open(bank_path);
      service::TraceStore traces(traces_path.empty() ? bank_path + ".traces.jsonl" : traces_path);
      service::ServiceConfig scfg;
      scfg.cors_origin = cors;
      scfg.pipeline.exec = eopts;
      service::Service svc(executor, bank, gw, prompts, traces, scfg);
      httplib::Server server;
      svc.mount(server);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ":" << port << std::endl;
      if (!server.listen(host, port)) throw Error("io_error", "cannot listen on port " + std::to_string(port));
      return 0;
    }

    if (ask->parsed()) {
      auto s = pipeline::strategy_from_string(strategy);
      if (!s) throw Error("bad_argument", "unknown strategy '" + strategy + "'");
      auto bank = bank::Bank::open(bank_path);
      pipeline::Options popts;
      popts.exec = eopts;
      pipeline::Pipeline p(executor, bank, gw, prompts, popts);
      auto trace = p.answer(question, k, *s);
      std::cout << service::dump(service::to_json(trace, {timings, timings}), 2) << "\n";
      return 0;
    }

    if (eval->parsed()) {
      std::optional<bank::Bank> bank;
      std::optional<pipeline::Pipeline> p;
      std::optional<pipeline::Strategy> s;
      if (!bank_path.empty()) {
        s = pipeline::strategy_from_string(strategy);
        if (!s) throw Error("bad_argument", "unknown strategy '" + strategy + "'");
        bank = bank::Bank::open(bank_path);
        pipeline::Options popts;
        popts.exec = eopts;
        p.emplace(executor, *bank, gw, prompts, popts);
      }
      std::vector<metrics::MetricReport> reports;
      std::vector<std::string> questions;
      for (const auto& j : read_jsonl(pairs)) {
        auto gold = j.at("gold_sql").get<std::string>();
        std::string pred = j.value("pred_sql", "");
        std::optional<double> conf;
        if (j.contains("conf") && j["conf"].is_number()) conf = j["conf"].get<double>();
        auto q = j.value("question", "");
        if (!j.contains("pred_sql")) {
          if (!p) throw Error("bad_argument", "pred_sql missing and no --bank to generate it");
          auto trace = p->answer(q, k, *s);
          pred = trace.synthesized_sql;
          conf = trace.confidence;
        }
        reports.push_back(metrics::score_sample(metrics::run_sample(executor, pred, gold, conf, eopts)));
        questions.push_back(q);
      }
      if (!csv.empty()) {
        std::ofstream f(csv, std::ios::trunc);
        f << "index,question,chrf,eem,ef1,ast,conf,flags\n";
        for (std::size_t i = 0; i < reports.size(); ++i) {
          const auto& r = reports[i];
          auto quoted = questions[i];
          for (std::size_t at = 0; (at = quoted.find('"', at)) != std::string::npos; at += 2) {
            quoted.insert(at, "\"");
          }
          f << i << ",\"" << quoted << "\"," << r.chrf << "," << r.eem << "," << r.ef1 << ","
            << (r.ast ? std::to_string(*r.ast) : "") << ","
            << (r.conf ? std::to_string(*r.conf) : "") << "," << util::join(r.flags, ";")
            << "\n";
        }
      }
      std::cout << service::dump(service::to_json(metrics::aggregate(reports)), 2) << "\n";
      return 0;
    }

    if (aug->parsed()) {
      auto bank = bank::Bank::open(bank_path);
      augment::GrowOptions opts;
      opts.batch = batch;
      opts.seed = seed;
      opts.timeout_ms = timeout_ms;
      if (!kinds.empty()) opts.kinds = parse_kinds(kinds);
      std::vector<augment::PendingVariant> pending;
      auto report = augment::grow_bank(bank, executor, gw, prompts, opts, &pending);
      auto j = service::to_json(report);
      j["bank_size"] = bank.size();
      Json pj = Json::array();
      for (const auto& v : pending) {
        pj.push_back({{"sql", v.sql}, {"kind", v.kind}, {"parent_id", v.parent_id}, {"reason", v.reason}});
      }
      j["pending_variants"] = std::move(pj);
      std::cout << service::dump(j, 2) << "\n";
      return 0;
    }

    if (bench->parsed()) {
      augment::ExpandOptions opts;
      opts.per_seed = per_seed;
      opts.seed = seed;
      opts.timeout_ms = timeout_ms;
      if (!kinds.empty()) opts.kinds = parse_kinds(kinds);
      auto result = augment::expand_benchmark(read_seeds(seeds), executor, gw, prompts, opts);
      std::ofstream f(out, std::ios::trunc);
      if (!f) throw Error("io_error", "cannot write " + out);
      for (const auto& e : result.entries) f << augment::to_jsonl(e) << "\n";
      auto j = service::to_json(result.report);
      j["entries"] = result.entries.size();
      std::cout << service::dump(j, 2) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
