#include <catch_amalgamated.hpp>

#include <cmath>

#include "fdnl2sql/pipeline/pipeline.hpp"
#include "fdnl2sql/sql/parser.hpp"
#include "fdnl2sql/sql/render.hpp"
#include "sqlite_helpers.hpp"
#include "support.hpp"

using namespace fdnl2sql;
using pipeline::Pipeline;
using pipeline::Strategy;
using Catch::Matchers::WithinAbs;

namespace {

const exec::Executor& db() { return *testsupport::toy().exec; }

util::Clock fixed_clock() {
  return [] { return std::string("2026-01-01T00:00:00Z"); };
}

/// Mock whose synthesis step always answers with `sql`.
provider::Gateway replying(const std::string& reply) {
  auto mock = std::make_shared<provider::MockProvider>();
  mock->rule(provider::PromptKind::Synthesize, "", reply)
      .rule(provider::PromptKind::ZeroShot, "", reply)
      .rule(provider::PromptKind::FewShot, "", reply)
      .rule(provider::PromptKind::Cot, "", reply);
  return testsupport::mock_gateway(mock);
}

}  // namespace

TEST_CASE("strategy names") {
  for (auto s : {Strategy::Fd, Strategy::ZeroShot, Strategy::FewShot, Strategy::Cot}) {
    CHECK(pipeline::strategy_from_string(pipeline::to_string(s)) == s);
  }
  CHECK(pipeline::to_string(Strategy::ZeroShot) == "zero_shot");
  CHECK_FALSE(pipeline::strategy_from_string("magic"));
  CHECK(pipeline::format_trace_id(7) == "tr-000007");
}

TEST_CASE("decomposition replies") {
  auto d = pipeline::parse_decomposition("Q?", "Sub-questions:\n1. phase 3\n- melanoma\n\n2) after 2018\n* x");
  CHECK(d.sub_questions == std::vector<std::string>{"phase 3", "melanoma", "after 2018", "x"});
  CHECK(pipeline::parse_decomposition("Q?", "  \n").sub_questions == std::vector<std::string>{"Q?"});
  CHECK(d.question == "Q?");
}

TEST_CASE("decompose through the mock") {
  auto gw = testsupport::mock_gateway();
  auto bank = bank::Bank::in_memory();
  Pipeline p(db(), bank, gw, provider::PromptSet::defaults());
  auto d = p.decompose("Which phase 3 melanoma trials, started after 2018 and recruiting?");
  CHECK(d.sub_questions ==
        std::vector<std::string>{"which phase 3 melanoma trials", "started after 2018", "recruiting"});
  CHECK(p.decompose("Which trials?").sub_questions == std::vector<std::string>{"Which trials?"});
}

TEST_CASE("SQL extraction") {
  CHECK(pipeline::extract_sql("```sql\nSELECT 1\n```").sql == "SELECT 1");
  CHECK(pipeline::extract_sql("Here you go:\n```\nSELECT a FROM t;\n```\nDone.").sql == "SELECT a FROM t");
  auto prose = pipeline::extract_sql("The answer is\nSELECT nct_id FROM trials WHERE phase = 3\nHope that helps.");
  CHECK(prose.sql == "SELECT nct_id FROM trials WHERE phase = 3");
  CHECK(prose.selectable);
  auto first = pipeline::extract_sql("SELECT 1; DROP TABLE trials");
  CHECK(first.sql == "SELECT 1");
  auto only = pipeline::extract_sql("```sql\nDROP TABLE trials\n```");
  CHECK_FALSE(only.selectable);
  CHECK(only.sql == "DROP TABLE trials");
  CHECK(pipeline::extract_sql("WITH x AS (SELECT 1 AS a) SELECT a FROM x").sql ==
        "WITH x AS (SELECT 1 AS a) SELECT a FROM x");
  CHECK_THROWS_AS(pipeline::extract_sql("I do not know."), pipeline::SynthesisUnparseable);
  CHECK_THROWS_AS(pipeline::extract_sql(""), pipeline::SynthesisUnparseable);
}

TEST_CASE("confidence from log-probabilities") {
  provider::GenerationResponse r;
  r.text = "```sql\nSELECT 1\n```";
  CHECK_FALSE(pipeline::sql_confidence(r, "SELECT 1"));
  r.tokens = std::vector<std::string>{"```sql\n", "SELECT", " 1", "\n```"};
  r.token_logprobs = std::vector<double>{-5.0, -0.2, -0.4, -5.0};
  // Only the two tokens inside the SQL span count.
  CHECK_THAT(*pipeline::sql_confidence(r, "SELECT 1"), WithinAbs(std::exp(-0.3), 1e-12));
  r.tokens.reset();
  CHECK_THAT(*pipeline::sql_confidence(r, "SELECT 1"), WithinAbs(std::exp(-10.6 / 4), 1e-12));
}

TEST_CASE("synthesis prompt layout") {
  auto prompts = provider::PromptSet::defaults();
  pipeline::Decomposition d{"Q?", {"phase 3", "melanoma"}};
  auto none = pipeline::build_synthesis_prompt(prompts, "Q?", d, {{}, {}}, "trials(a)\n");
  CHECK(none.find("Approved examples retrieved for each sub-question:\nnone\n") != std::string::npos);
  CHECK(none.find("- phase 3\n- melanoma\n") != std::string::npos);

  bank::RetrievalHit h{3, 0.91234, "phase = <number>", "Which phase 3 trials?",
                       "SELECT nct_id FROM trials WHERE phase = 3"};
  auto some = pipeline::build_synthesis_prompt(prompts, "Q?", d, {{h}, {}}, "trials(a)\n");
  CHECK(some.find("Sub-question 1: phase 3\n  Question: Which phase 3 trials?\n"
                  "  SQL: SELECT nct_id FROM trials WHERE phase = 3\n  Score: 0.9123\n"
                  "  WHERE pattern: phase = <number>\nSub-question 2: melanoma\n  none\n") !=
        std::string::npos);
  CHECK(some == pipeline::build_synthesis_prompt(prompts, "Q?", d, {{h}, {}}, "trials(a)\n"));
}

TEST_CASE("fd answer matches direct execution of its SQL") {
  auto gw = testsupport::mock_gateway();
  auto bank = testsupport::seeded_bank(gw);
  Pipeline p(db(), bank, gw, provider::PromptSet::defaults(), {}, fixed_clock());
  auto t = p.answer("Which phase 3 trials enrolled at least 500 patients?", 3, Strategy::Fd);
  CHECK_FALSE(t.error);
  CHECK(t.trace_id == "tr-000001");
  CHECK(t.created_at == "2026-01-01T00:00:00Z");
  CHECK(t.retrievals.size() == t.decomposition.sub_questions.size());
  for (const auto& r : t.retrievals) CHECK(r.size() == 3);
  CHECK(t.guard_report.passes());
  REQUIRE(t.result);
  auto direct = testsupport::sqlite_column(testsupport::toy().path, t.synthesized_sql);
  CHECK(t.result->rows.size() == direct.size());
  REQUIRE(t.confidence);
  CHECK(*t.confidence > 0.0);
  CHECK(*t.confidence <= 1.0);
  std::vector<std::string> stages;
  for (const auto& s : t.timings) stages.push_back(s.stage);
  CHECK(stages == std::vector<std::string>{"decompose", "retrieve", "synthesize", "guard", "execute"});
  CHECK(p.answer("x", 1, Strategy::Fd).trace_id == "tr-000002");
  CHECK(p.answer("x", 1, Strategy::Fd, "custom").trace_id == "custom");
}

TEST_CASE("unsafe replies are never executed") {
  testsupport::TempDir dir;
  auto path = dir.file("copy.db");
  std::filesystem::copy_file(testsupport::toy().path, path);
  exec::Executor local(path, testsupport::toy().schema);
  int executed = 0;
  local.set_audit([&](const std::string&) { ++executed; });
  auto bank = bank::Bank::in_memory();
  for (const char* reply : {"```sql\nDROP TABLE trials\n```", "SELECT nope FROM trials",
                            "DELETE FROM trials", "```sql\nSELECT 1; DELETE FROM trials\n```"}) {
    CAPTURE(reply);
    auto gw = replying(reply);
    Pipeline p(local, bank, gw, provider::PromptSet::defaults());
    auto t = p.answer("anything", 5, Strategy::ZeroShot);
    if (std::string(reply).find("SELECT 1;") != std::string::npos) {
      // The first statement is taken; the trailing DELETE never reaches SQLite.
      CHECK(t.synthesized_sql == "SELECT 1");
      CHECK_FALSE(t.error);
      continue;
    }
    REQUIRE(t.error);
    CHECK(t.error->stage == "guard");
    CHECK(t.error->code == "guard_failed");
    CHECK_FALSE(t.guard_report.passes());
    CHECK_FALSE(t.result);
  }
  CHECK(executed == 1);
  CHECK(testsupport::sqlite_column(path, "SELECT count(*) FROM trials")[0] ==
        std::to_string(schema::kToyRowCount));
}

TEST_CASE("garbage replies stop at extraction") {
  auto gw = replying("no sql here");
  auto bank = bank::Bank::in_memory();
  Pipeline p(db(), bank, gw, provider::PromptSet::defaults());
  auto t = p.answer("q", 5, Strategy::Cot);
  REQUIRE(t.error);
  CHECK(t.error->stage == "extract");
  CHECK(t.error->code == "synthesis_unparseable");
}

TEST_CASE("runtime errors are recorded at execution") {
  auto gw = replying("SELECT abs(1, 2) FROM trials");
  auto bank = bank::Bank::in_memory();
  Pipeline p(db(), bank, gw, provider::PromptSet::defaults());
  auto t = p.answer("q", 5, Strategy::ZeroShot);
  REQUIRE(t.error);
  CHECK(t.error->stage == "execute");
  CHECK(t.error->code == "execution_error");
}

TEST_CASE("baseline strategies") {
  auto gw = testsupport::mock_gateway();
  auto bank = testsupport::seeded_bank(gw);
  Pipeline p(db(), bank, gw, provider::PromptSet::defaults());
  auto zs = p.answer("Which trials started in 2019?", 5, Strategy::ZeroShot);
  CHECK(zs.retrievals.empty());
  CHECK(zs.demonstrations.empty());
  CHECK(zs.decomposition.sub_questions == std::vector<std::string>{"Which trials started in 2019?"});
  auto fs = p.answer("Which trials started in 2019?", 4, Strategy::FewShot);
  CHECK(fs.retrievals.empty());
  CHECK(fs.demonstrations.size() == 4);
  auto cot = p.answer("Which trials started in 2019?", 4, Strategy::Cot);
  CHECK(cot.reply.rfind("Reasoning:", 0) == 0);
  CHECK(cot.result);
}

TEST_CASE("empty bank gives no retrievals and a 'none' prompt") {
  auto gw = testsupport::mock_gateway();
  auto bank = bank::Bank::in_memory();
  Pipeline p(db(), bank, gw, provider::PromptSet::defaults());
  auto t = p.answer("Which trials?", 5, Strategy::Fd);
  REQUIRE(t.retrievals.size() == 1);
  CHECK(t.retrievals[0].empty());
  CHECK(t.result);
}

TEST_CASE("provider outages propagate") {
  auto gw = testsupport::mock_gateway(std::make_shared<provider::UnreachableProvider>());
  auto bank = bank::Bank::in_memory();
  Pipeline p(db(), bank, gw, provider::PromptSet::defaults());
  CHECK_THROWS_AS(p.answer("q", 5, Strategy::Fd), provider::ProviderError);
}

TEST_CASE("answers are deterministic") {
  auto gw = testsupport::mock_gateway();
  auto bank = testsupport::seeded_bank(gw);
  Pipeline a(db(), bank, gw, provider::PromptSet::defaults(), {}, fixed_clock());
  Pipeline b(db(), bank, gw, provider::PromptSet::defaults(), {}, fixed_clock());
  auto x = a.answer("Which PD-1 trials enrolled more than 300 patients?", 5, Strategy::Fd);
  auto y = b.answer("Which PD-1 trials enrolled more than 300 patients?", 5, Strategy::Fd);
  CHECK(x.reply == y.reply);
  CHECK(x.synthesized_sql == y.synthesized_sql);
  CHECK(x.confidence == y.confidence);
  CHECK(x.result->rows == y.result->rows);
}
