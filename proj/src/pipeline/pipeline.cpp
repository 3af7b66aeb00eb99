#include "fdnl2sql/pipeline/pipeline.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "fdnl2sql/sql/analysis.hpp"
#include "fdnl2sql/sql/parser.hpp"

namespace fdnl2sql::pipeline {

namespace {

constexpr std::pair<Strategy, std::string_view> kStrategies[] = {
    {Strategy::Fd, "fd"},
    {Strategy::ZeroShot, "zero_shot"},
    {Strategy::FewShot, "few_shot"},
    {Strategy::Cot, "cot"},
};

bool is_fence(std::string_view line) { return util::trim(line).rfind("```", 0) == 0; }

// Contents of each fenced block, then the reply with fence lines removed.
std::vector<std::string> extraction_candidates(std::string_view reply) {
  std::vector<std::string> blocks;
  std::string outside;
  std::string current;
  bool in_block = false;
  for (const auto& line : util::split_lines(reply)) {
    if (is_fence(line)) {
      if (in_block) blocks.push_back(current);
      current.clear();
      in_block = !in_block;
      continue;
    }
    if (in_block) current += line + "\n";
    outside += line + "\n";
  }
  if (in_block) blocks.push_back(current);
  blocks.push_back(outside);
  return blocks;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::optional<sql::SqlQuery> try_parse(std::string_view text) {
  try {
    return sql::parse_sql(text);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<Extraction> first_select(const sql::SqlQuery& q) {
  for (const auto& st : q.statements) {
    if (st.kind != sql::StatementKind::Other) return Extraction{st.text, true};
  }
  return std::nullopt;
}

// Prose around the SQL: start at each SELECT / WITH keyword and drop
// trailing lines until the remainder parses.
std::optional<Extraction> scan_prose(const std::string& text) {
  auto lower = util::to_lower(text);
  for (std::size_t pos = 0; pos < lower.size(); ++pos) {
    if (pos > 0 && word_char(lower[pos - 1])) continue;
    bool kw = false;
    for (std::string_view w : {"select", "with"}) {
      if (lower.compare(pos, w.size(), w) == 0 &&
          (pos + w.size() == lower.size() || !word_char(lower[pos + w.size()]))) {
        kw = true;
      }
    }
    if (!kw) continue;
    std::string rest = text.substr(pos);
    while (!rest.empty()) {
      if (auto q = try_parse(rest)) {
        if (auto e = first_select(*q)) return e;
        break;
      }
      auto nl = rest.find_last_of('\n', rest.size() >= 2 ? rest.size() - 2 : 0);
      if (nl == std::string::npos || nl == 0) break;
      rest.resize(nl);
    }
  }
  return std::nullopt;
}

std::string violation_summary(const sql::GuardReport& r) {
  std::vector<std::string> parts;
  for (const auto& v : r.violations) parts.push_back(v.code + ": " + v.detail);
  return parts.empty() ? "guard did not pass" : util::join(parts, "; ");
}

provider::PromptKind prompt_kind(Strategy s) {
  switch (s) {
    case Strategy::Fd:
      return provider::PromptKind::Synthesize;
    case Strategy::ZeroShot:
      return provider::PromptKind::ZeroShot;
    case Strategy::FewShot:
      return provider::PromptKind::FewShot;
    case Strategy::Cot:
      return provider::PromptKind::Cot;
  }
  return provider::PromptKind::Synthesize;
}

}  // namespace

std::string_view to_string(Strategy s) {
  for (const auto& [v, name] : kStrategies) {
    if (v == s) return name;
  }
  return "fd";
}

std::optional<Strategy> strategy_from_string(std::string_view s) {
  for (const auto& [v, name] : kStrategies) {
    if (name == s) return v;
  }
  return std::nullopt;
}

std::string format_trace_id(std::uint64_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "tr-%06llu", static_cast<unsigned long long>(n));
  return buf;
}

Extraction extract_sql(std::string_view reply) {
  std::optional<Extraction> fallback;
  for (const auto& text : extraction_candidates(reply)) {
    if (util::trim(text).empty()) continue;
    if (auto q = try_parse(text)) {
      if (auto e = first_select(*q)) return *e;
      if (!fallback && !q->statements.empty()) {
        fallback = Extraction{q->statements.front().text, false};
      }
      continue;
    }
    if (auto e = scan_prose(text)) return *e;
  }
  if (fallback) return *fallback;
  throw SynthesisUnparseable("no SELECT or WITH statement in the reply");
}

std::optional<double> sql_confidence(const provider::GenerationResponse& resp,
                                     std::string_view sql) {
  if (!resp.token_logprobs || resp.token_logprobs->empty()) return std::nullopt;
  const auto& lps = *resp.token_logprobs;
  double sum = 0.0;
  std::size_t n = 0;
  auto start = resp.text.find(sql);
  if (resp.tokens && resp.tokens->size() == lps.size() && start != std::string::npos &&
      !sql.empty()) {
    auto end = start + sql.size();
    std::size_t cursor = 0;
    for (std::size_t i = 0; i < lps.size(); ++i) {
      const auto& tok = (*resp.tokens)[i];
      auto at = resp.text.find(tok, cursor);
      if (at == std::string::npos) continue;
      cursor = at + tok.size();
      if (at < end && at + tok.size() > start) {
        sum += lps[i];
        ++n;
      }
    }
  } else {
    for (double lp : lps) sum += lp;
    n = lps.size();
  }
  if (n == 0) return std::nullopt;
  return std::exp(sum / static_cast<double>(n));
}

Decomposition parse_decomposition(const std::string& question, const std::string& reply) {
  Decomposition d{question, {}};
  for (const auto& raw : util::split_lines(reply)) {
    std::string line(util::trim(raw));
    if (line.empty() || line.back() == ':') continue;
    if (line.rfind("- ", 0) == 0 || line.rfind("* ", 0) == 0) {
      line = line.substr(2);
    } else {
      std::size_t i = 0;
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      if (i > 0 && i + 1 < line.size() && (line[i] == '.' || line[i] == ')') && line[i + 1] == ' ') {
        line = line.substr(i + 2);
      }
    }
    line = std::string(util::trim(line));
    if (!line.empty()) d.sub_questions.push_back(line);
  }
  if (d.sub_questions.empty()) d.sub_questions.push_back(question);
  return d;
}

std::string format_hit(const bank::RetrievalHit& hit, bool with_score) {
  std::string out = "  Question: " + hit.question + "\n  SQL: " + hit.sql + "\n";
  if (with_score) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", hit.score);
    out += std::string("  Score: ") + buf + "\n";
    out += "  WHERE pattern: " + (hit.where_pattern_hint.empty() ? "-" : hit.where_pattern_hint) +
           "\n";
  }
  return out;
}

std::string build_synthesis_prompt(const provider::PromptSet& prompts, const std::string& question,
                                   const Decomposition& decomposition,
                                   const std::vector<std::vector<bank::RetrievalHit>>& bundles,
                                   const std::string& schema_context) {
  std::string subs;
  for (const auto& s : decomposition.sub_questions) subs += "- " + s + "\n";
  std::size_t total = 0;
  for (const auto& b : bundles) total += b.size();
  std::string exemplars;
  if (total == 0) {
    exemplars = "none\n";
  } else {
    for (std::size_t i = 0; i < decomposition.sub_questions.size(); ++i) {
      exemplars += "Sub-question " + std::to_string(i + 1) + ": " +
                   decomposition.sub_questions[i] + "\n";
      if (i >= bundles.size() || bundles[i].empty()) {
        exemplars += "  none\n";
        continue;
      }
      for (const auto& h : bundles[i]) exemplars += format_hit(h, true);
    }
  }
  return prompts.render(provider::PromptKind::Synthesize, {{"schema", schema_context},
                                                           {"question", question},
                                                           {"decomposition", subs},
                                                           {"exemplars", exemplars}});
}

Pipeline::Pipeline(const exec::Executor& db, const bank::Bank& bank, const provider::Gateway& gw,
                   provider::PromptSet prompts, Options opts, util::Clock clock)
    : db_(db),
      bank_(bank),
      gw_(gw),
      prompts_(std::move(prompts)),
      opts_(opts),
      clock_(std::move(clock)),
      schema_context_(schema::render_schema_context(db.schema())) {}

Decomposition Pipeline::decompose(const std::string& question) const {
  provider::GenerationRequest req;
  req.task = provider::PromptKind::Decompose;
  req.max_tokens = opts_.max_tokens;
  req.prompt = prompts_.render(provider::PromptKind::Decompose,
                               {{"schema", schema_context_}, {"question", question}});
  return parse_decomposition(question, gw_.generate(req).text);
}

std::vector<bank::RetrievalHit> Pipeline::retrieve(const std::string& text, std::size_t k) const {
  if (bank_.size() == 0 || k == 0) return {};
  return bank_.retrieve(gw_.embed(text), k);
}

PipelineTrace Pipeline::answer(const std::string& question, std::size_t k, Strategy strategy,
                               std::string trace_id) const {
  PipelineTrace t;
  t.trace_id = trace_id.empty() ? format_trace_id(++counter_) : std::move(trace_id);
  t.question = question;
  t.strategy = strategy;
  t.k = k;
  t.created_at = clock_();
  auto stage = [&](const std::string& name, auto&& fn) {
    util::Stopwatch sw;
    fn();
    t.timings.push_back({name, sw.elapsed_ms()});
  };

  std::string prompt;
  switch (strategy) {
    case Strategy::Fd:
      stage("decompose", [&] { t.decomposition = decompose(question); });
      stage("retrieve", [&] {
        for (const auto& sub : t.decomposition.sub_questions) {
          t.retrievals.push_back(retrieve(sub, k));
        }
      });
      prompt = build_synthesis_prompt(prompts_, question, t.decomposition, t.retrievals,
                                      schema_context_);
      break;
    case Strategy::FewShot: {
      t.decomposition = {question, {question}};
      stage("retrieve", [&] { t.demonstrations = retrieve(question, k); });
      std::string demos;
      for (const auto& h : t.demonstrations) demos += format_hit(h, false);
      if (demos.empty()) demos = "none\n";
      prompt = prompts_.render(provider::PromptKind::FewShot, {{"schema", schema_context_},
                                                               {"question", question},
                                                               {"exemplars", demos}});
      break;
    }
    case Strategy::ZeroShot:
    case Strategy::Cot:
      t.decomposition = {question, {question}};
      prompt = prompts_.render(prompt_kind(strategy),
                               {{"schema", schema_context_}, {"question", question}});
      break;
  }

  provider::GenerationResponse resp;
  stage("synthesize", [&] {
    provider::GenerationRequest req;
    req.prompt = prompt;
    req.task = prompt_kind(strategy);
    req.max_tokens = opts_.max_tokens;
    req.want_logprobs = true;
    resp = gw_.generate(req);
  });
  t.reply = resp.text;

  Extraction ex;
  try {
    ex = extract_sql(resp.text);
  } catch (const SynthesisUnparseable& e) {
    t.error = StageError{"extract", e.code(), e.what()};
    return t;
  }
  t.synthesized_sql = ex.sql;
  t.confidence = sql_confidence(resp, ex.sql);

  sql::SqlQuery q;
  bool guarded = false;
  stage("guard", [&] {
    try {
      q = sql::parse_sql(ex.sql);
      t.guard_report = sql::guard(q, db_.schema());
      guarded = true;
    } catch (const Error& e) {
      t.error = StageError{"guard", e.code(), e.what()};
    }
  });
  if (!guarded) return t;
  if (!t.guard_report.passes()) {
    t.error = StageError{"guard", "guard_failed", violation_summary(t.guard_report)};
    return t;
  }

  stage("execute", [&] {
    try {
      t.result = db_.execute(q, opts_.exec);
    } catch (const Error& e) {
      t.error = StageError{"execute", e.code(), e.what()};
    }
  });
  return t;
}

}  // namespace fdnl2sql::pipeline
