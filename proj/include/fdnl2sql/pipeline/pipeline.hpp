#pragma once

#include <atomic>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdnl2sql/bank/bank.hpp"
#include "fdnl2sql/error.hpp"
#include "fdnl2sql/exec/executor.hpp"
#include "fdnl2sql/provider/gateway.hpp"
#include "fdnl2sql/provider/prompts.hpp"
#include "fdnl2sql/sql/guard.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::pipeline {

enum class Strategy { Fd, ZeroShot, FewShot, Cot };

std::string_view to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view s);

struct Decomposition {
  std::string question;
  std::vector<std::string> sub_questions;  // never empty
};

struct StageError {
  std::string stage;  // extract, guard, execute
  std::string code;
  std::string message;
};

struct StageTiming {
  std::string stage;
  double ms = 0.0;
};

struct PipelineTrace {
  std::string trace_id;
  std::string question;
  Strategy strategy = Strategy::Fd;
  std::size_t k = 0;
  Decomposition decomposition;
  std::vector<std::vector<bank::RetrievalHit>> retrievals;  // one per sub-question (fd only)
  std::vector<bank::RetrievalHit> demonstrations;           // few_shot only
  std::string reply;
  std::string synthesized_sql;
  sql::GuardReport guard_report;
  std::optional<exec::ResultTable> result;
  std::optional<double> confidence;
  std::vector<StageTiming> timings;
  std::optional<StageError> error;
  std::string created_at;
};

class SynthesisUnparseable : public Error {
 public:
  explicit SynthesisUnparseable(const std::string& detail)
      : Error("synthesis_unparseable", detail) {}
};

struct Extraction {
  std::string sql;          // raw statement text as it appears in the reply
  bool selectable = false;  // false: only non-SELECT statements were found
};

/// First SELECT / WITH statement of a reply, after dropping Markdown code
/// fences. A reply made only of other statements comes back with
/// selectable=false so the guard can report it. SynthesisUnparseable when
/// nothing parses.
Extraction extract_sql(std::string_view reply);

/// exp(mean log-probability) of the reply tokens that overlap the SQL.
std::optional<double> sql_confidence(const provider::GenerationResponse& resp,
                                     std::string_view sql);

/// One line per sub-question: bullets, numbering and blank lines removed.
/// Falls back to the question itself.
Decomposition parse_decomposition(const std::string& question, const std::string& reply);

/// Indented "Question:" / "SQL:" block of a hit as used by the prompts.
std::string format_hit(const bank::RetrievalHit& hit, bool with_score);

std::string build_synthesis_prompt(const provider::PromptSet& prompts, const std::string& question,
                                   const Decomposition& decomposition,
                                   const std::vector<std::vector<bank::RetrievalHit>>& bundles,
                                   const std::string& schema_context);

struct Options {
  exec::ExecOptions exec;
  int max_tokens = 512;
};

class Pipeline {
 public:
  Pipeline(const exec::Executor& db, const bank::Bank& bank, const provider::Gateway& gw,
           provider::PromptSet prompts, Options opts = {}, util::Clock clock = util::rfc3339_now);

  /// ProviderError propagates.
  Decomposition decompose(const std::string& question) const;

  /// Runs the strategy end to end. Extraction, guard and execution
  /// failures are recorded in the trace; ProviderError propagates. An empty
  /// `trace_id` draws the next "tr-NNNNNN" from an internal counter.
  PipelineTrace answer(const std::string& question, std::size_t k, Strategy strategy,
                       std::string trace_id = {}) const;

  const std::string& schema_context() const { return schema_context_; }

 private:
  const exec::Executor& db_;
  const bank::Bank& bank_;
  const provider::Gateway& gw_;
  provider::PromptSet prompts_;
  Options opts_;
  util::Clock clock_;
  std::string schema_context_;
  mutable std::atomic<std::uint64_t> counter_{0};

  std::vector<bank::RetrievalHit> retrieve(const std::string& text, std::size_t k) const;
};

std::string format_trace_id(std::uint64_t n);

}  // namespace fdnl2sql::pipeline
