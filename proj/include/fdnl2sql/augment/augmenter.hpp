#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "fdnl2sql/augment/mutations.hpp"
#include "fdnl2sql/bank/bank.hpp"
#include "fdnl2sql/error.hpp"
#include "fdnl2sql/exec/executor.hpp"
#include "fdnl2sql/provider/gateway.hpp"
#include "fdnl2sql/provider/prompts.hpp"
#include "fdnl2sql/schema/toy_db.hpp"

namespace fdnl2sql::augment {

enum class DiscardReason { Error, Empty, Duplicate };
std::string_view to_string(DiscardReason r);

struct RetainedVariant {
  Mutation mutation;
  std::string normal_form;
};

using FilterResult = std::variant<RetainedVariant, DiscardReason>;

struct Tally {
  std::size_t attempted = 0;
  std::size_t retained = 0;
  std::size_t discarded_error = 0;
  std::size_t discarded_empty = 0;
  std::size_t discarded_duplicate = 0;

  void count(const FilterResult& r);
  bool conserved() const {
    return attempted == retained + discarded_error + discarded_empty + discarded_duplicate;
  }
};

struct AugmentReport : Tally {
  std::map<std::string, std::size_t> per_kind;  // retained per kind
  std::map<std::string, Tally> per_kind_tally;
  /// Retained variants whose back-translation failed. They are counted in
  /// `retained` but were not added to the bank.
  std::size_t pending = 0;

  void count(MutationKind kind, const FilterResult& r);
  bool conserved() const;
};

/// Re-parses and guards the variant, de-duplicates it against `known` and
/// the parent's normal form, then requires at least one row.
FilterResult apply_and_filter(const exec::Executor& db, const sql::SqlQuery& parent,
                              const Mutation& m, const std::set<std::string>& known,
                              int timeout_ms = 5000);

class UnparseableReply : public Error {
 public:
  explicit UnparseableReply(const std::string& detail) : Error("unparseable_reply", detail) {}
};

struct BackTranslation {
  std::string question;
  std::vector<std::string> sub_questions;
};

/// Asks the provider for a question (and one sub-question per condition)
/// matching the SQL. The reply needs a "Question:" line; sub-questions are
/// the bullet lines after it.
BackTranslation back_translate(const std::string& variant_sql, const provider::Gateway& gw,
                               const provider::PromptSet& prompts,
                               const std::string& schema_context);
BackTranslation parse_back_translation(const std::string& reply);

class SeedInvalid : public Error {
 public:
  SeedInvalid(std::size_t index, const std::string& detail)
      : Error("seed_invalid", "seed " + std::to_string(index) + ": " + detail), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

struct BenchmarkEntry {
  std::string question;
  std::string sql;
  std::string kind;
  std::string parent_question;
  std::string parent_sql;
  bool template_question = false;  // back-translation failed
};

std::string to_jsonl(const BenchmarkEntry& e);

struct ExpandOptions {
  std::size_t per_seed = 3;
  std::vector<MutationKind> kinds;  // empty: all kinds
  std::uint64_t seed = 0;
  int timeout_ms = 5000;
};

struct ExpandResult {
  std::vector<BenchmarkEntry> entries;
  AugmentReport report;
};

ExpandResult expand_benchmark(const std::vector<schema::SeedPair>& seeds,
                              const exec::Executor& db, const provider::Gateway& gw,
                              const provider::PromptSet& prompts, const ExpandOptions& opts);

struct PendingVariant {
  std::string sql;
  std::string kind;
  std::int64_t parent_id = 0;
  std::string reason;
};

/// Operator, column and value edits: the families used to grow the bank.
const std::vector<MutationKind>& bank_growth_kinds();

struct GrowOptions {
  std::size_t batch = 5;
  std::uint64_t seed = 0;
  std::vector<MutationKind> kinds = bank_growth_kinds();
  int timeout_ms = 5000;
  const std::atomic<bool>* stop = nullptr;  // checked between candidates
};

/// Samples `batch` source exemplars (with replacement) from the seed and
/// approved entries and, for each, tries its mutations in seeded order
/// until one is retained. Retained variants are back-translated and added
/// with source=augmented; failures land in `pending` when given.
AugmentReport grow_bank(bank::Bank& bank, const exec::Executor& db, const provider::Gateway& gw,
                        const provider::PromptSet& prompts, const GrowOptions& opts,
                        std::vector<PendingVariant>* pending = nullptr);

}  // namespace fdnl2sql::augment
