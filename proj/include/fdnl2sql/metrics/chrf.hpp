#pragma once

#include <string_view>

namespace fdnl2sql::metrics {

/// Character n-gram F-score in [0, 100]: orders 1..max_order over Unicode
/// code points with all whitespace removed, precision and recall averaged
/// over the orders both sides have n-grams for, then F-beta.
double chrf_score(std::string_view hypothesis, std::string_view reference, int max_order = 6,
                  double beta = 2.0);

}  // namespace fdnl2sql::metrics
