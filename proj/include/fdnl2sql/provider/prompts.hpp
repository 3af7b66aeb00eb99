#pragma once

#include <map>
#include <string>

#include "fdnl2sql/provider/gateway.hpp"

namespace fdnl2sql::provider {

/// Prompt templates with {schema}, {question}, {exemplars},
/// {decomposition} and {sql} placeholders.
class PromptSet {
 public:
  static PromptSet defaults();
  /// Defaults overridden by `<dir>/<kind>.txt` for each file present.
  static PromptSet load(const std::string& dir);

  const std::string& get(PromptKind k) const;
  void set(PromptKind k, std::string text) { templates_[k] = std::move(text); }

  /// Substitutes known placeholders; other braces pass through untouched.
  std::string render(PromptKind k, const std::map<std::string, std::string>& vars) const;

 private:
  std::map<PromptKind, std::string> templates_;
};

}  // namespace fdnl2sql::provider
