#pragma once

#include <string>
#include <vector>

#include "fdnl2sql/sql/ast.hpp"

namespace fdnl2sql::sql {

struct Description {
  std::string question;
  std::vector<std::string> sub_questions;
};

/// Template rendering of a SELECT:
///   "Which <projection> for <table> where <p1> and <p2>?"
/// with one "which <table> have <p>?" sub-question per WHERE conjunct.
Description describe_sql(const SqlQuery& q);

}  // namespace fdnl2sql::sql
