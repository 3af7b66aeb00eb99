#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "support.hpp"

namespace testsupport {

struct MetricCase {
  std::string pred_sql;
  std::string gold_sql;
  double eem = 0, ef1 = 0, chrf = 0, ast = 0;
  std::string ef1_oracle;
};

/// Reference values frozen by tests/oracle/metrics_reference.py.
inline std::vector<MetricCase> load_metric_cases(const std::string& path) {
  auto j = nlohmann::json::parse(read_file(path));
  std::vector<MetricCase> out;
  for (const auto& e : j) {
    out.push_back({e.at("pred_sql"), e.at("gold_sql"), e.at("eem"), e.at("ef1"), e.at("chrf"),
                   e.at("ast"), e.at("ef1_oracle")});
  }
  return out;
}

}  // namespace testsupport
