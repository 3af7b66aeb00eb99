#include "fdnl2sql/bank/bank.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>

#include <json.hpp>

#include "fdnl2sql/sql/analysis.hpp"
#include "fdnl2sql/sql/parser.hpp"
#include "fdnl2sql/sql/render.hpp"

namespace fdnl2sql::bank {

using nlohmann::ordered_json;

std::string_view to_string(Source s) {
  switch (s) {
    case Source::Seed:
      return "seed";
    case Source::Approved:
      return "approved";
    case Source::Augmented:
      return "augmented";
  }
  return "seed";
}

std::optional<Source> source_from_string(std::string_view s) {
  if (s == "seed") return Source::Seed;
  if (s == "approved") return Source::Approved;
  if (s == "augmented") return Source::Augmented;
  return std::nullopt;
}

std::string to_jsonl(const Exemplar& e) {
  ordered_json j;
  j["id"] = e.id;
  j["question"] = e.question;
  j["sql"] = e.sql;
  j["decomposition"] = e.decomposition ? ordered_json(*e.decomposition) : ordered_json(nullptr);
  j["embedding"] = e.embedding;
  j["source"] = std::string(to_string(e.source));
  j["parent_id"] = e.parent_id ? ordered_json(*e.parent_id) : ordered_json(nullptr);
  j["mutation_kind"] = e.mutation_kind ? ordered_json(*e.mutation_kind) : ordered_json(nullptr);
  j["created_at"] = e.created_at;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

namespace {

struct Entry {
  Exemplar ex;
  std::string normal_form;
  std::string where_pattern;
};

// Parses and checks the SQL; returns (normal form, where pattern).
std::pair<std::string, std::string> check_sql(const std::string& text) {
  sql::SqlQuery q;
  try {
    q = sql::parse_sql(text);
  } catch (const Error& err) {
    throw GuardFailed(err.what());
  }
  if (!q.is_select()) throw GuardFailed("SQL is not read-only");
  if (q.statement_count() != 1) throw GuardFailed("SQL has more than one statement");
  return {sql::normalize_sql(q), sql::extract_where_pattern(q)};
}

void check_norm(const std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  if (v.empty() || std::abs(std::sqrt(n) - 1.0) > 1e-6) {
    throw InvalidExemplar("embedding is not unit-norm");
  }
}

Exemplar from_json(const ordered_json& j) {
  Exemplar e;
  for (const char* key : {"id", "question", "sql", "embedding", "source", "created_at"}) {
    if (!j.contains(key)) throw InvalidExemplar(std::string("missing key \"") + key + "\"");
  }
  e.id = j.at("id").get<std::int64_t>();
  e.question = j.at("question").get<std::string>();
  e.sql = j.at("sql").get<std::string>();
  if (j.contains("decomposition") && !j["decomposition"].is_null()) {
    e.decomposition = j["decomposition"].get<std::vector<std::string>>();
  }
  e.embedding = j.at("embedding").get<std::vector<double>>();
  auto src = source_from_string(j.at("source").get<std::string>());
  if (!src) throw InvalidExemplar("unknown source");
  e.source = *src;
  if (j.contains("parent_id") && !j["parent_id"].is_null()) {
    e.parent_id = j["parent_id"].get<std::int64_t>();
  }
  if (j.contains("mutation_kind") && !j["mutation_kind"].is_null()) {
    e.mutation_kind = j["mutation_kind"].get<std::string>();
  }
  e.created_at = j.at("created_at").get<std::string>();
  return e;
}

}  // namespace

struct Bank::State {
  std::string path;  // empty: in-memory
  util::Clock clock;
  mutable std::shared_mutex mu;
  // Writers hold the gate while waiting for mu; readers pass through it.
  mutable std::mutex gate;

  std::shared_lock<std::shared_mutex> read_lock() const {
    std::lock_guard g(gate);
    return std::shared_lock(mu);
  }
  std::vector<Entry> entries;
  std::map<std::string, std::int64_t> by_normal_form;
  std::map<std::int64_t, std::size_t> by_id;
  std::int64_t next_id = 1;
  std::size_t dim = 0;

  void validate(const Exemplar& e) const {
    check_norm(e.embedding);
    if (dim != 0 && e.embedding.size() != dim) {
      throw InvalidExemplar("embedding dimension " + std::to_string(e.embedding.size()) +
                            " differs from the bank's " + std::to_string(dim));
    }
    if (e.source == Source::Augmented && (!e.parent_id || !e.mutation_kind)) {
      throw InvalidExemplar("augmented exemplar needs parent_id and mutation_kind");
    }
    if (e.parent_id && !by_id.count(*e.parent_id)) {
      throw InvalidExemplar("parent_id " + std::to_string(*e.parent_id) + " does not exist");
    }
  }

  void index(Exemplar e, std::string normal_form, std::string pattern) {
    dim = e.embedding.size();
    next_id = std::max(next_id, e.id + 1);
    by_id[e.id] = entries.size();
    by_normal_form[normal_form] = e.id;
    entries.push_back({std::move(e), std::move(normal_form), std::move(pattern)});
  }
};

Bank::Bank(std::unique_ptr<State> s) : s_(std::move(s)) {}
Bank::Bank(Bank&&) noexcept = default;
Bank& Bank::operator=(Bank&&) noexcept = default;
Bank::~Bank() = default;

Bank Bank::in_memory(util::Clock clock) {
  auto s = std::make_unique<State>();
  s->clock = std::move(clock);
  return Bank(std::move(s));
}

Bank Bank::open(const std::string& path, util::Clock clock) {
  auto s = std::make_unique<State>();
  s->path = path;
  s->clock = std::move(clock);
  std::ifstream in(path);
  if (!in) {
    if (std::filesystem::exists(path)) throw BankIoError("cannot read " + path);
    return Bank(std::move(s));
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (util::trim(line).empty()) continue;
    try {
      auto e = from_json(ordered_json::parse(line));
      if (s->by_id.count(e.id)) throw InvalidExemplar("duplicate id " + std::to_string(e.id));
      s->validate(e);
      auto [nf, pattern] = check_sql(e.sql);
      if (s->by_normal_form.count(nf)) throw InvalidExemplar("duplicate SQL normal form");
      s->index(std::move(e), std::move(nf), std::move(pattern));
    } catch (const CorruptRecord&) {
      throw;
    } catch (const std::exception& err) {
      throw CorruptRecord(lineno, err.what());
    }
  }
  return Bank(std::move(s));
}

AddResult Bank::add(Exemplar e) {
  auto [nf, pattern] = check_sql(e.sql);
  std::lock_guard gate(s_->gate);
  std::unique_lock lock(s_->mu);
  if (auto it = s_->by_normal_form.find(nf); it != s_->by_normal_form.end()) {
    return {it->second, false};
  }
  s_->validate(e);
  e.id = s_->next_id;
  if (e.created_at.empty()) e.created_at = s_->clock();

  if (!s_->path.empty()) {
    auto line = to_jsonl(e) + "\n";
    auto parent = std::filesystem::path(s_->path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    FILE* f = std::fopen(s_->path.c_str(), "a");
    if (!f) throw BankIoError("cannot append to " + s_->path);
    bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size();
    ok = std::fflush(f) == 0 && ok;
    ok = ::fsync(fileno(f)) == 0 && ok;
    ok = std::fclose(f) == 0 && ok;
    if (!ok) throw BankIoError("write to " + s_->path + " failed");
  }
  auto id = e.id;
  s_->index(std::move(e), std::move(nf), std::move(pattern));
  return {id, true};
}

std::vector<RetrievalHit> Bank::retrieve(const std::vector<double>& query, std::size_t k) const {
  auto lock = s_->read_lock();
  if (s_->entries.empty()) throw EmptyBank();
  if (k == 0) throw InvalidExemplar("k must be positive");
  if (query.size() != s_->dim) throw InvalidExemplar("query embedding has the wrong dimension");

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(s_->entries.size());
  for (std::size_t i = 0; i < s_->entries.size(); ++i) {
    const auto& v = s_->entries[i].ex.embedding;
    double dot = 0.0;
    for (std::size_t d = 0; d < v.size(); ++d) dot += v[d] * query[d];
    scored.emplace_back(std::clamp(dot, -1.0, 1.0), i);
  }
  auto n = std::min(k, scored.size());
  auto better = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return s_->entries[a.second].ex.id < s_->entries[b.second].ex.id;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    better);
  std::vector<RetrievalHit> hits;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = s_->entries[scored[i].second];
    hits.push_back({e.ex.id, scored[i].first, e.where_pattern, e.ex.question, e.ex.sql});
  }
  return hits;
}

std::size_t Bank::size() const {
  auto lock = s_->read_lock();
  return s_->entries.size();
}

std::vector<Exemplar> Bank::snapshot() const {
  auto lock = s_->read_lock();
  std::vector<Exemplar> out;
  out.reserve(s_->entries.size());
  for (const auto& e : s_->entries) out.push_back(e.ex);
  return out;
}

std::optional<Exemplar> Bank::get(std::int64_t id) const {
  auto lock = s_->read_lock();
  auto it = s_->by_id.find(id);
  if (it == s_->by_id.end()) return std::nullopt;
  return s_->entries[it->second].ex;
}

std::set<std::string> Bank::normal_forms() const {
  auto lock = s_->read_lock();
  std::set<std::string> out;
  for (const auto& [nf, id] : s_->by_normal_form) out.insert(nf);
  return out;
}

const std::string& Bank::path() const { return s_->path; }

}  // namespace fdnl2sql::bank
