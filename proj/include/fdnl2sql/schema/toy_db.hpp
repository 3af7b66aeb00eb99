#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fdnl2sql/error.hpp"

namespace fdnl2sql::schema {

class PathUnwritable : public Error {
 public:
  explicit PathUnwritable(const std::string& detail) : Error("path_unwritable", detail) {}
};

/// Fixed value pools of the synthetic oncology table.
const std::vector<std::string>& toy_cancer_types();
const std::vector<std::string>& toy_ici_classes();
const std::vector<std::string>& toy_endpoints();
const std::vector<std::string>& toy_statuses();

inline constexpr int kToyRowCount = 300;

/// Writes the synthetic `trials` table to `path`, replacing any existing
/// file. Same seed, same rows.
void generate_toy_db(std::uint64_t seed, const std::string& path);

struct SeedPair {
  std::string question;
  std::string sql;
};

/// Hand-written question/SQL pairs over the toy table.
const std::vector<SeedPair>& toy_seed_pairs();

}  // namespace fdnl2sql::schema
