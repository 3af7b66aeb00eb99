#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "fdnl2sql/bank/bank.hpp"
#include "fdnl2sql/exec/executor.hpp"
#include "fdnl2sql/provider/embedder.hpp"
#include "fdnl2sql/provider/gateway.hpp"
#include "fdnl2sql/provider/mock.hpp"
#include "fdnl2sql/schema/schema.hpp"
#include "fdnl2sql/schema/toy_db.hpp"

namespace testsupport {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> n{0};
    path_ = fs::temp_directory_path() /
            ("fdnl2sql-test-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

/// The seed-42 toy database, generated once per test binary.
struct ToyDb {
  TempDir dir;
  std::string path;
  fdnl2sql::schema::SchemaDict schema;
  std::unique_ptr<fdnl2sql::exec::Executor> exec;

  ToyDb() : path(dir.file("toy.db")) {
    fdnl2sql::schema::generate_toy_db(42, path);
    schema = fdnl2sql::schema::introspect(path);
    exec = std::make_unique<fdnl2sql::exec::Executor>(path, schema);
  }
};

inline ToyDb& toy() {
  static ToyDb db;
  return db;
}

inline fdnl2sql::provider::Gateway mock_gateway(
    std::shared_ptr<const fdnl2sql::provider::GenerationProvider> gen =
        std::make_shared<fdnl2sql::provider::MockProvider>()) {
  return fdnl2sql::provider::Gateway(std::move(gen),
                                     std::make_shared<fdnl2sql::provider::TrigramEmbedder>());
}

/// Bank holding the toy seed pairs, embedded with the trigram embedder.
inline fdnl2sql::bank::Bank seeded_bank(const fdnl2sql::provider::Gateway& gw,
                                        const std::string& path = {}) {
  auto bank = path.empty() ? fdnl2sql::bank::Bank::in_memory() : fdnl2sql::bank::Bank::open(path);
  for (const auto& s : fdnl2sql::schema::toy_seed_pairs()) {
    fdnl2sql::bank::Exemplar e;
    e.question = s.question;
    e.sql = s.sql;
    e.embedding = gw.embed(s.question);
    bank.add(std::move(e));
  }
  return bank;
}

}  // namespace testsupport
