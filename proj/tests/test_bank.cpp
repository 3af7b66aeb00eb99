#include <catch_amalgamated.hpp>

#include <cmath>
#include <json.hpp>
#include <atomic>
#include <random>
#include <thread>

#include "fdnl2sql/bank/bank.hpp"
#include "retrieval_oracle.hpp"
#include "support.hpp"

using namespace fdnl2sql;
using bank::Bank;
using bank::Exemplar;
using testsupport::TempDir;

namespace {

util::Clock fixed_clock() {
  return [] { return std::string("2026-01-01T00:00:00Z"); };
}

Exemplar make(std::string q, std::string sql, std::vector<double> v) {
  Exemplar e;
  e.question = std::move(q);
  e.sql = std::move(sql);
  e.embedding = std::move(v);
  return e;
}

std::vector<double> unit(std::mt19937_64& g, std::size_t dim) {
  std::normal_distribution<double> n;
  std::vector<double> v(dim);
  double s = 0;
  for (auto& x : v) {
    x = n(g);
    s += x * x;
  }
  for (auto& x : v) x /= std::sqrt(s);
  return v;
}

}  // namespace

TEST_CASE("add assigns ids and deduplicates on normal form") {
  auto b = Bank::in_memory(fixed_clock());
  auto r1 = b.add(make("q1", "SELECT phase FROM trials", {1, 0}));
  auto r2 = b.add(make("q2", "select  PHASE from trials;", {0, 1}));
  auto r3 = b.add(make("q3", "SELECT nct_id FROM trials", {0, 1}));
  CHECK(r1.id == 1);
  CHECK(r1.inserted);
  CHECK(r2.id == 1);
  CHECK_FALSE(r2.inserted);
  CHECK(r3.id == 2);
  CHECK(b.size() == 2);
  CHECK(b.get(2)->created_at == "2026-01-01T00:00:00Z");
  CHECK(b.get(1)->sql == "SELECT phase FROM trials");
  CHECK_FALSE(b.get(9));
  CHECK(b.normal_forms() == std::set<std::string>{"SELECT nct_id FROM trials", "SELECT phase FROM trials"});
}

TEST_CASE("add rejects unsafe SQL and invalid records") {
  auto b = Bank::in_memory();
  CHECK_THROWS_AS(b.add(make("q", "DROP TABLE trials", {1, 0})), bank::GuardFailed);
  CHECK_THROWS_AS(b.add(make("q", "SELECT 1; SELECT 2", {1, 0})), bank::GuardFailed);
  CHECK_THROWS_AS(b.add(make("q", "SELEC 1", {1, 0})), bank::GuardFailed);
  CHECK_THROWS_AS(b.add(make("q", "SELECT 1", {2, 0})), bank::InvalidExemplar);
  b.add(make("q", "SELECT 1", {1, 0}));
  CHECK_THROWS_AS(b.add(make("q", "SELECT 2", {1, 0, 0})), bank::InvalidExemplar);

  auto aug = make("q", "SELECT 3", {0, 1});
  aug.source = bank::Source::Augmented;
  CHECK_THROWS_AS(b.add(aug), bank::InvalidExemplar);
  aug.parent_id = 42;
  aug.mutation_kind = "op_change";
  CHECK_THROWS_AS(b.add(aug), bank::InvalidExemplar);
  aug.parent_id = 1;
  CHECK(b.add(aug).inserted);
  CHECK(b.get(2)->parent_id == 1);
}

TEST_CASE("retrieval examples") {
  auto b = Bank::in_memory();
  double r = 1 / std::sqrt(2.0);
  b.add(make("a", "SELECT 1", {1, 0}));
  b.add(make("b", "SELECT 2", {0, 1}));
  b.add(make("c", "SELECT 3", {r, r}));
  b.add(make("d", "SELECT 4", {r, r}));

  auto hits = b.retrieve({1, 0}, 2);
  REQUIRE(hits.size() == 2);
  CHECK(hits[0].exemplar_id == 1);
  CHECK(hits[0].score == 1.0);
  CHECK(hits[1].exemplar_id == 3);  // tie with 4 broken by id
  CHECK_THAT(hits[1].score, Catch::Matchers::WithinAbs(r, 1e-12));

  CHECK(b.retrieve({0, 1}, 10).size() == 4);
  CHECK_THROWS_AS(b.retrieve({0, 1}, 0), bank::InvalidExemplar);
  CHECK_THROWS_AS(b.retrieve({0, 1, 0}, 1), bank::InvalidExemplar);
  CHECK_THROWS_AS(Bank::in_memory().retrieve({1, 0}, 1), bank::EmptyBank);
}

TEST_CASE("hits carry the WHERE pattern") {
  auto b = Bank::in_memory();
  b.add(make("q", "SELECT nct_id FROM trials WHERE phase = 3 AND status = 'Recruiting'", {1, 0}));
  b.add(make("q", "SELECT nct_id FROM trials", {0, 1}));
  auto hits = b.retrieve({1, 0}, 2);
  CHECK(hits[0].where_pattern_hint == "phase = <number> AND status = <text>");
  CHECK(hits[1].where_pattern_hint.empty());
}

TEST_CASE("retrieval matches a brute-force oracle on random banks") {
  std::mt19937_64 g(12345);
  for (int round = 0; round < 50; ++round) {
    std::size_t dim = 2 + g() % 12;
    std::size_t n = 1 + g() % 60;
    auto b = Bank::in_memory();
    std::vector<std::vector<double>> vecs;
    std::vector<std::int64_t> ids;
    for (std::size_t i = 0; i < n; ++i) {
      // Duplicate vectors now and then to exercise ties.
      auto v = (i > 0 && g() % 5 == 0) ? vecs[g() % vecs.size()] : unit(g, dim);
      auto res = b.add(make("q", "SELECT " + std::to_string(i), v));
      vecs.push_back(v);
      ids.push_back(res.id);
    }
    auto q = unit(g, dim);
    std::size_t k = 1 + g() % (n + 3);
    auto hits = b.retrieve(q, k);
    auto expect = testsupport::brute_force_top_k(vecs, ids, q, k);
    REQUIRE(hits.size() == expect.size());
    for (std::size_t i = 0; i < hits.size(); ++i) {
      CHECK(hits[i].exemplar_id == expect[i].id);
      CHECK(hits[i].score == expect[i].score);
    }
  }
}

TEST_CASE("persisted bank reloads identically") {
  TempDir dir;
  auto path = dir.file("sub/bank.jsonl");
  {
    auto b = Bank::open(path, fixed_clock());
    auto gw = testsupport::mock_gateway();
    auto e = make("Which trials?", "SELECT nct_id FROM trials", gw.embed("Which trials?"));
    e.decomposition = std::vector<std::string>{"which trials"};
    b.add(e);
    auto child = make("Which phase 3 trials?", "SELECT nct_id FROM trials WHERE phase = 3",
                      gw.embed("Which phase 3 trials?"));
    child.source = bank::Source::Augmented;
    child.parent_id = 1;
    child.mutation_kind = "value_edit_numeric";
    b.add(child);
  }
  auto again = Bank::open(path);
  REQUIRE(again.size() == 2);
  auto child = again.get(2);
  CHECK(child->source == bank::Source::Augmented);
  CHECK(child->parent_id == 1);
  CHECK(child->mutation_kind == "value_edit_numeric");
  CHECK(again.get(1)->decomposition == std::vector<std::string>{"which trials"});
  CHECK(again.get(1)->created_at == "2026-01-01T00:00:00Z");
  CHECK(again.add(make("x", "SELECT 5", again.get(1)->embedding)).id == 3);

  // Each line is a standalone JSON record with the fields in order.
  auto lines = util::split_lines(testsupport::read_file(path));
  REQUIRE(lines.size() >= 3);
  auto j = nlohmann::json::parse(lines[1]);
  CHECK(j["id"] == 2);
  CHECK(j["source"] == "augmented");
  CHECK(bank::to_jsonl(*again.get(2)) == lines[1]);
}

TEST_CASE("corrupt records name their line") {
  TempDir dir;
  auto path = dir.file("bank.jsonl");
  {
    auto b = Bank::open(path, fixed_clock());
    b.add(make("a", "SELECT 1", {1, 0}));
  }
  auto good = testsupport::read_file(path);
  testsupport::write_file(path, good + "{not json\n");
  try {
    Bank::open(path);
    FAIL("expected CorruptRecord");
  } catch (const bank::CorruptRecord& e) {
    CHECK(e.line() == 2);
  }
  testsupport::write_file(path, good + good);
  CHECK_THROWS_AS(Bank::open(path), bank::CorruptRecord);
  auto j = nlohmann::json::parse(good);
  j["sql"] = "DELETE FROM trials";
  testsupport::write_file(path, j.dump() + "\n");
  CHECK_THROWS_AS(Bank::open(path), bank::CorruptRecord);
  j = nlohmann::json::parse(good);
  j["source"] = "imported";
  testsupport::write_file(path, j.dump() + "\n");
  CHECK_THROWS_AS(Bank::open(path), bank::CorruptRecord);
}

TEST_CASE("missing file is an empty bank") {
  TempDir dir;
  CHECK(Bank::open(dir.file("none.jsonl")).size() == 0);
}

TEST_CASE("source names") {
  for (auto s : {bank::Source::Seed, bank::Source::Approved, bank::Source::Augmented}) {
    CHECK(bank::source_from_string(bank::to_string(s)) == s);
  }
  CHECK_FALSE(bank::source_from_string("other"));
}

TEST_CASE("concurrent readers and a writer") {
  auto gw = testsupport::mock_gateway();
  auto b = testsupport::seeded_bank(gw);
  auto q = gw.embed("phase 3 melanoma");
  std::atomic<bool> stop{false};
  std::atomic<int> bad{0};
  std::vector<std::thread> readers;
  for (int i = 0; i < 4; ++i) {
    readers.emplace_back([&] {
      while (!stop) {
        auto hits = b.retrieve(q, 5);
        if (hits.size() != 5) ++bad;
      }
    });
  }
  for (int i = 0; i < 50; ++i) {
    b.add(make("extra", "SELECT " + std::to_string(1000 + i), gw.embed("extra " + std::to_string(i))));
  }
  stop = true;
  for (auto& t : readers) t.join();
  CHECK(bad == 0);
  CHECK(b.size() == schema::toy_seed_pairs().size() + 50);
}
