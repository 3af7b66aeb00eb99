#include "fdnl2sql/provider/mock.hpp"

#include <sstream>

#include "fdnl2sql/sql/describe.hpp"
#include "fdnl2sql/sql/parser.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::provider {

namespace {

// The user question sits on an unindented "Question:" line; exemplar
// blocks indent theirs.
std::string find_question(const std::string& prompt) {
  for (const auto& line : util::split_lines(prompt)) {
    if (line.rfind("Question: ", 0) == 0 && line != "Question: <question>") {
      return std::string(util::trim(line.substr(10)));
    }
  }
  return {};
}

std::string find_sql(const std::string& prompt) {
  for (const auto& line : util::split_lines(prompt)) {
    auto t = util::trim(line);
    if (t.rfind("SQL: ", 0) == 0) return std::string(util::trim(t.substr(5)));
  }
  return {};
}

std::string first_table(const std::string& prompt) {
  auto lines = util::split_lines(prompt);
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) {
    if (lines[i] == "Database schema:") {
      auto paren = lines[i + 1].find('(');
      if (paren != std::string::npos && paren > 0) return lines[i + 1].substr(0, paren);
    }
  }
  return "trials";
}

std::vector<std::string> split_predicates(const std::string& question) {
  std::string q = util::to_lower(question);
  while (!q.empty() && (q.back() == '?' || q.back() == '.')) q.pop_back();
  std::vector<std::string> parts{q};
  for (const std::string sep : {", ", " and ", " with "}) {
    std::vector<std::string> next;
    for (const auto& p : parts) {
      std::size_t start = 0;
      while (true) {
        auto at = p.find(sep, start);
        auto piece = util::trim(std::string_view(p).substr(start, at - start));
        if (!piece.empty()) next.emplace_back(piece);
        if (at == std::string::npos) break;
        start = at + sep.size();
      }
    }
    parts = std::move(next);
  }
  return parts;
}

}  // namespace

MockProvider& MockProvider::script(const std::string& prompt, std::string reply) {
  scripts_[util::fnv1a64(prompt)] = std::move(reply);
  return *this;
}

MockProvider& MockProvider::rule(PromptKind task, std::string needle, std::string reply) {
  rules_.push_back({task, std::move(needle), std::move(reply)});
  return *this;
}

MockProvider& MockProvider::responder(Responder r) {
  responder_ = std::move(r);
  return *this;
}

std::string MockProvider::heuristic_reply(const GenerationRequest& req) {
  switch (req.task) {
    case PromptKind::Decompose: {
      auto q = find_question(req.prompt);
      auto parts = split_predicates(q);
      if (parts.size() <= 1) return q;
      return util::join(parts, "\n");
    }
    case PromptKind::Sql2Nl: {
      auto text = find_sql(req.prompt);
      try {
        auto d = sql::describe_sql(sql::parse_sql(text));
        std::string out = "Question: " + d.question + "\nSub-questions:\n";
        for (const auto& s : d.sub_questions) out += "- " + s + "\n";
        return out;
      } catch (const Error&) {
        return "I cannot describe this query.";
      }
    }
    case PromptKind::ZeroShot:
    case PromptKind::FewShot:
    case PromptKind::Cot:
    case PromptKind::Synthesize: {
      auto text = find_sql(req.prompt);
      if (text.empty()) text = "SELECT * FROM " + first_table(req.prompt);
      std::string out;
      if (req.task == PromptKind::Cot) {
        out += "Reasoning: the question \"" + find_question(req.prompt) +
               "\" is answered from the " + first_table(req.prompt) + " table.\n\n";
      }
      return out + "```sql\n" + text + "\n```";
    }
    case PromptKind::Other:
      break;
  }
  return find_question(req.prompt);
}

GenerationResponse MockProvider::generate(const GenerationRequest& req) const {
  std::optional<std::string> reply;
  if (auto it = scripts_.find(util::fnv1a64(req.prompt)); it != scripts_.end()) {
    reply = it->second;
  }
  if (!reply) {
    for (const auto& r : rules_) {
      if ((r.task == PromptKind::Other || r.task == req.task) &&
          req.prompt.find(r.needle) != std::string::npos) {
        reply = r.reply;
        break;
      }
    }
  }
  if (!reply && responder_) reply = responder_(req);
  if (!reply) {
    if (!opts_.heuristics) throw ProviderError("mock has no reply for this prompt");
    reply = heuristic_reply(req);
  }

  GenerationResponse resp;
  resp.text = std::move(*reply);
  if (req.want_logprobs && opts_.logprobs) {
    std::vector<std::string> tokens;
    std::vector<double> lps;
    std::istringstream in(resp.text);
    std::string tok;
    while (in >> tok) {
      lps.push_back(-static_cast<double>(util::fnv1a64(tok) % 997 + 1) / 20000.0);
      tokens.push_back(std::move(tok));
    }
    resp.tokens = std::move(tokens);
    resp.token_logprobs = std::move(lps);
  }
  return resp;
}

GenerationResponse UnreachableProvider::generate(const GenerationRequest&) const {
  throw ProviderError("provider endpoint unreachable");
}

}  // namespace fdnl2sql::provider
