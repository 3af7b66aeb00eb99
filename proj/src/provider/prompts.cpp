#include "fdnl2sql/provider/prompts.hpp"

#include <fstream>
#include <sstream>

namespace fdnl2sql::provider {

namespace {

const char* kZeroShot =
    "Database schema:\n{schema}\n"
    "Question: {question}\n\n"
    "Write a single SQLite SELECT statement that answers the question. Reply with the SQL "
    "only, inside a ```sql block.\n";

const char* kFewShot =
    "Database schema:\n{schema}\n"
    "Solved examples:\n{exemplars}\n"
    "Question: {question}\n\n"
    "Following the style of the examples, write a single SQLite SELECT statement that answers "
    "the question. Reply with the SQL only, inside a ```sql block.\n";

const char* kCot =
    "Database schema:\n{schema}\n"
    "Question: {question}\n\n"
    "Think step by step: name the columns to return, then each filter condition, then write a "
    "single SQLite SELECT statement. Give your reasoning first and the final SQL last, inside "
    "a ```sql block.\n";

const char* kDecompose =
    "Database schema:\n{schema}\n"
    "Question: {question}\n\n"
    "Split the question into sub-questions so that each one asks about exactly one filter "
    "condition (a column, a comparison and a value) of the SQL WHERE clause. Write one "
    "sub-question per line and nothing else. If the question has no filter condition, write "
    "the question itself.\n";

const char* kSynthesize =
    "Database schema:\n{schema}\n"
    "Question: {question}\n\n"
    "Sub-questions:\n{decomposition}\n"
    "Approved examples retrieved for each sub-question:\n{exemplars}\n"
    "Write a single SQLite SELECT or WITH statement that answers the question. Use the example "
    "SQL as structural templates, but satisfy every condition of the question and do not copy "
    "literal values the question does not ask for. Reply with the SQL only, inside a ```sql "
    "block.\n";

const char* kSql2Nl =
    "Database schema:\n{schema}\n"
    "SQL: {sql}\n\n"
    "Write the question a clinician would ask to get exactly this result, then one "
    "sub-question per WHERE condition. Use this layout:\n"
    "Question: <question>\n"
    "Sub-questions:\n"
    "- <sub-question>\n";

}  // namespace

PromptSet PromptSet::defaults() {
  PromptSet p;
  p.templates_[PromptKind::ZeroShot] = kZeroShot;
  p.templates_[PromptKind::FewShot] = kFewShot;
  p.templates_[PromptKind::Cot] = kCot;
  p.templates_[PromptKind::Decompose] = kDecompose;
  p.templates_[PromptKind::Synthesize] = kSynthesize;
  p.templates_[PromptKind::Sql2Nl] = kSql2Nl;
  p.templates_[PromptKind::Other] = "{question}";
  return p;
}

PromptSet PromptSet::load(const std::string& dir) {
  auto p = defaults();
  if (dir.empty()) return p;
  for (auto k : {PromptKind::ZeroShot, PromptKind::FewShot, PromptKind::Cot, PromptKind::Decompose,
                 PromptKind::Synthesize, PromptKind::Sql2Nl}) {
    std::ifstream in(dir + "/" + std::string(to_string(k)) + ".txt");
    if (!in) continue;
    std::ostringstream ss;
    ss << in.rdbuf();
    p.templates_[k] = ss.str();
  }
  return p;
}

const std::string& PromptSet::get(PromptKind k) const { return templates_.at(k); }

std::string PromptSet::render(PromptKind k, const std::map<std::string, std::string>& vars) const {
  const auto& t = get(k);
  std::string out;
  std::size_t i = 0;
  while (i < t.size()) {
    if (t[i] == '{') {
      auto close = t.find('}', i);
      if (close != std::string::npos) {
        auto it = vars.find(t.substr(i + 1, close - i - 1));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += t[i++];
  }
  return out;
}

}  // namespace fdnl2sql::provider
