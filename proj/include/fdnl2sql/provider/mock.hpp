#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdnl2sql/provider/gateway.hpp"

namespace fdnl2sql::provider {

/// Deterministic in-process generator. Lookup order: exact-prompt scripts,
/// then rules (task + substring), then the responder hook, then built-in
/// heuristics that read the default prompt layouts. Configure before
/// sharing; generate() is const and thread-safe.
class MockProvider : public GenerationProvider {
 public:
  struct Options {
    bool logprobs = true;    // report pseudo log-probabilities when asked
    bool heuristics = true;  // otherwise unmatched prompts raise ProviderError
  };

  MockProvider() = default;
  explicit MockProvider(Options o) : opts_(o) {}

  MockProvider& script(const std::string& prompt, std::string reply);
  /// Matches requests of `task` (Other matches any task) whose prompt
  /// contains `needle`. Earlier rules win.
  MockProvider& rule(PromptKind task, std::string needle, std::string reply);
  using Responder = std::function<std::optional<std::string>(const GenerationRequest&)>;
  MockProvider& responder(Responder r);

  GenerationResponse generate(const GenerationRequest& req) const override;

  /// Reply the heuristics produce for a request.
  static std::string heuristic_reply(const GenerationRequest& req);

 private:
  struct Rule {
    PromptKind task;
    std::string needle;
    std::string reply;
  };
  Options opts_;
  std::map<std::uint64_t, std::string> scripts_;
  std::vector<Rule> rules_;
  Responder responder_;
};

/// Always fails with ProviderError, as an unreachable endpoint would.
class UnreachableProvider : public GenerationProvider {
 public:
  GenerationResponse generate(const GenerationRequest& req) const override;
};

}  // namespace fdnl2sql::provider
