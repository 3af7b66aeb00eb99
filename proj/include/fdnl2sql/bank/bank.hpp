#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fdnl2sql/error.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::bank {

enum class Source { Seed, Approved, Augmented };

std::string_view to_string(Source s);
std::optional<Source> source_from_string(std::string_view s);

struct Exemplar {
  std::int64_t id = 0;
  std::string question;
  std::string sql;
  std::optional<std::vector<std::string>> decomposition;
  std::vector<double> embedding;  // unit L2 norm
  Source source = Source::Seed;
  std::optional<std::int64_t> parent_id;
  std::optional<std::string> mutation_kind;
  std::string created_at;  // RFC-3339
};

struct RetrievalHit {
  std::int64_t exemplar_id = 0;
  double score = 0.0;
  std::string where_pattern_hint;
  std::string question;
  std::string sql;
};

class CorruptRecord : public Error {
 public:
  CorruptRecord(std::size_t line, const std::string& detail)
      : Error("corrupt_record", "line " + std::to_string(line) + ": " + detail), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class GuardFailed : public Error {
 public:
  explicit GuardFailed(const std::string& detail) : Error("guard_failed", detail) {}
};

class InvalidExemplar : public Error {
 public:
  explicit InvalidExemplar(const std::string& detail) : Error("invalid_exemplar", detail) {}
};

class EmptyBank : public Error {
 public:
  EmptyBank() : Error("empty_bank", "the exemplar bank is empty") {}
};

class BankIoError : public Error {
 public:
  explicit BankIoError(const std::string& detail) : Error("bank_io_error", detail) {}
};

struct AddResult {
  std::int64_t id = 0;
  bool inserted = false;  // false: an exemplar with the same normalized SQL exists
};

/// JSONL-backed exemplar store with exact cosine retrieval. Readers run
/// concurrently; add() calls are serialized.
class Bank {
 public:
  /// Loads `path` (a missing file is an empty bank). Throws CorruptRecord.
  static Bank open(const std::string& path, util::Clock clock = util::rfc3339_now);
  /// A bank that never touches disk.
  static Bank in_memory(util::Clock clock = util::rfc3339_now);

  Bank(Bank&&) noexcept;
  Bank& operator=(Bank&&) noexcept;
  ~Bank();

  /// Assigns the id (and created_at when empty), persists, and indexes.
  /// GuardFailed unless the SQL is a single read-only statement;
  /// InvalidExemplar for a non-unit embedding or missing lineage.
  AddResult add(Exemplar e);

  /// Top-min(k, size) hits by dot product, ties by ascending id.
  std::vector<RetrievalHit> retrieve(const std::vector<double>& query, std::size_t k) const;

  std::size_t size() const;
  std::vector<Exemplar> snapshot() const;
  std::optional<Exemplar> get(std::int64_t id) const;
  std::set<std::string> normal_forms() const;
  const std::string& path() const;

 private:
  struct State;
  explicit Bank(std::unique_ptr<State> s);
  std::unique_ptr<State> s_;
};

/// Serialized record (one line, no newline).
std::string to_jsonl(const Exemplar& e);

}  // namespace fdnl2sql::bank
