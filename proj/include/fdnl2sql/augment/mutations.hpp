#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdnl2sql/exec/executor.hpp"
#include "fdnl2sql/schema/schema.hpp"
#include "fdnl2sql/sql/ast.hpp"

namespace fdnl2sql::augment {

enum class MutationKind {
  OpChange,
  ColumnSubstitute,
  ValueEditNumeric,
  ValueEditText,
  KeepTwoColumns,
  DropOneColumn,
  DropOneWhere,
  DropTwoWhere,
  KeepOneWhere,
  RemoveWhere,
};

std::string_view to_string(MutationKind k);
std::optional<MutationKind> kind_from_string(std::string_view s);
const std::vector<MutationKind>& all_kinds();

struct Mutation {
  MutationKind kind = MutationKind::OpChange;
  /// Path of the edited node: "where/0/1" for a predicate reached through
  /// the WHERE tree, "select[2]" for a projection item, "where" for
  /// clause-level edits.
  std::string site;
  std::string before;
  std::string after;
  sql::SelectStmt variant;
  std::string variant_sql;  // normal form of `variant`
};

/// Distinct values of a column, used by value_edit_text.
using ValueSampler =
    std::function<std::vector<exec::Cell>(const std::string& table, const std::string& column)>;

/// Every single-edit variant of the first statement's main SELECT core.
/// The seed only drives value sampling. Compound selects yield nothing.
std::vector<Mutation> enumerate_mutations(const sql::SqlQuery& q, const schema::SchemaDict& schema,
                                          std::uint64_t rng_seed,
                                          const ValueSampler& sampler = {});

}  // namespace fdnl2sql::augment
