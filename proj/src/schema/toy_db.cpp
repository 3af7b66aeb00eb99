#include "fdnl2sql/schema/toy_db.hpp"

#include <sqlite3.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "fdnl2sql/util.hpp"

namespace fdnl2sql::schema {

const std::vector<std::string>& toy_cancer_types() {
  static const std::vector<std::string> v = {
      "melanoma",
      "non-small cell lung cancer",
      "renal cell carcinoma",
      "urothelial carcinoma",
      "hepatocellular carcinoma",
      "head and neck squamous cell carcinoma",
      "triple-negative breast cancer",
      "colorectal cancer",
      "gastric cancer",
      "Hodgkin lymphoma",
  };
  return v;
}

const std::vector<std::string>& toy_ici_classes() {
  static const std::vector<std::string> v = {"PD-1", "PD-L1", "CTLA-4", "PD-1 + CTLA-4",
                                             "LAG-3 + PD-1"};
  return v;
}

const std::vector<std::string>& toy_endpoints() {
  static const std::vector<std::string> v = {"OS", "PFS", "ORR", "DFS", "EFS", "safety"};
  return v;
}

const std::vector<std::string>& toy_statuses() {
  static const std::vector<std::string> v = {"Completed", "Recruiting", "Active, not recruiting",
                                             "Terminated"};
  return v;
}

namespace {

const char* kDdl =
    "CREATE TABLE trials (\n"
    "  nct_id TEXT PRIMARY KEY,\n"
    "  cancer_type TEXT NOT NULL,\n"
    "  ici_class TEXT NOT NULL,\n"
    "  phase INTEGER NOT NULL,\n"
    "  primary_endpoint TEXT NOT NULL,\n"
    "  median_followup_months REAL,\n"
    "  enrollment INTEGER NOT NULL,\n"
    "  start_year INTEGER NOT NULL,\n"
    "  status TEXT NOT NULL\n"
    ")";

// Melanoma and lung cancer dominate immunotherapy trials; the pool index
// is drawn from a skewed table.
const int kCancerWeights[] = {5, 5, 3, 3, 2, 2, 2, 1, 1, 1};
const int kPhaseWeights[] = {2, 4, 3, 1};
const int kIciWeights[] = {5, 3, 2, 2, 1};

template <std::size_t N>
std::size_t weighted(util::Rng& rng, const int (&w)[N]) {
  int total = 0;
  for (int x : w) total += x;
  auto r = static_cast<int>(rng.below(static_cast<std::uint64_t>(total)));
  for (std::size_t i = 0; i < N; ++i) {
    if (r < w[i]) return i;
    r -= w[i];
  }
  return N - 1;
}

void check(int rc, sqlite3* db, const std::string& what) {
  if (rc != SQLITE_OK && rc != SQLITE_DONE) {
    throw PathUnwritable(what + ": " + sqlite3_errmsg(db));
  }
}

}  // namespace

void generate_toy_db(std::uint64_t seed, const std::string& path) {
  std::error_code ec;
  std::filesystem::remove(path, ec);
  if (ec) throw PathUnwritable("cannot replace " + path + ": " + ec.message());

  sqlite3* db = nullptr;
  int rc = sqlite3_open_v2(path.c_str(), &db, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
    sqlite3_close(db);
    throw PathUnwritable("cannot create " + path + ": " + msg);
  }
  struct Closer {
    sqlite3* db;
    ~Closer() { sqlite3_close(db); }
  } closer{db};

  check(sqlite3_exec(db, kDdl, nullptr, nullptr, nullptr), db, "create table");
  check(sqlite3_exec(db, "BEGIN", nullptr, nullptr, nullptr), db, "begin");

  sqlite3_stmt* st = nullptr;
  check(sqlite3_prepare_v2(db, "INSERT INTO trials VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9)",
                           -1, &st, nullptr),
        db, "prepare insert");
  struct Finalizer {
    sqlite3_stmt* st;
    ~Finalizer() { sqlite3_finalize(st); }
  } finalizer{st};

  util::Rng rng(seed);
  for (int i = 0; i < kToyRowCount; ++i) {
    char nct[16];
    std::snprintf(nct, sizeof nct, "NCT%08d",
                  static_cast<int>(1000000 + i * 9973 + static_cast<int>(rng.below(9000))));
    const auto& cancer = toy_cancer_types()[weighted(rng, kCancerWeights)];
    const auto& ici = toy_ici_classes()[weighted(rng, kIciWeights)];
    int phase = static_cast<int>(weighted(rng, kPhaseWeights)) + 1;
    const auto& endpoint = toy_endpoints()[rng.below(toy_endpoints().size())];
    int start_year = 2010 + static_cast<int>(rng.below(15));
    const auto& status = toy_statuses()[rng.below(toy_statuses().size())];
    int base = phase == 1 ? 20 : phase == 2 ? 60 : 200;
    int enrollment = base + static_cast<int>(rng.below(static_cast<std::uint64_t>(base * 4)));
    double followup = std::round((3.0 + rng.unit() * 57.0) * 10.0) / 10.0;
    bool followup_known = status != "Recruiting" || rng.below(3) == 0;

    sqlite3_reset(st);
    sqlite3_bind_text(st, 1, nct, -1, SQLITE_TRANSIENT);
    sqlite3_bind_text(st, 2, cancer.c_str(), -1, SQLITE_TRANSIENT);
    sqlite3_bind_text(st, 3, ici.c_str(), -1, SQLITE_TRANSIENT);
    sqlite3_bind_int(st, 4, phase);
    sqlite3_bind_text(st, 5, endpoint.c_str(), -1, SQLITE_TRANSIENT);
    if (followup_known) {
      sqlite3_bind_double(st, 6, followup);
    } else {
      sqlite3_bind_null(st, 6);
    }
    sqlite3_bind_int(st, 7, enrollment);
    sqlite3_bind_int(st, 8, start_year);
    sqlite3_bind_text(st, 9, status.c_str(), -1, SQLITE_TRANSIENT);
    check(sqlite3_step(st), db, "insert row");
  }
  check(sqlite3_exec(db, "COMMIT", nullptr, nullptr, nullptr), db, "commit");
}

const std::vector<SeedPair>& toy_seed_pairs() {
  static const std::vector<SeedPair> v = {
      {"Which phase 3 melanoma trials started in 2018 or later?",
       "SELECT nct_id, cancer_type, start_year FROM trials WHERE cancer_type = 'melanoma' AND "
       "phase = 3 AND start_year >= 2018"},
      {"Which PD-1 trials enrolled more than 300 patients?",
       "SELECT nct_id, enrollment FROM trials WHERE ici_class = 'PD-1' AND enrollment > 300"},
      {"List completed trials of phase 2 or higher that started before 2020.",
       "SELECT nct_id, cancer_type, ici_class, phase FROM trials WHERE phase >= 2 AND status = "
       "'Completed' AND start_year < 2020"},
      {"Which overall-survival trials report more than 24 months of median follow-up?",
       "SELECT nct_id, median_followup_months FROM trials WHERE primary_endpoint = 'OS' AND "
       "median_followup_months > 24"},
      {"How many phase 3 trials are there per cancer type?",
       "SELECT cancer_type, count(*) AS n_trials FROM trials WHERE phase = 3 GROUP BY "
       "cancer_type"},
      {"Which PD-L1 trials target non-small cell lung cancer?",
       "SELECT nct_id, phase, enrollment FROM trials WHERE cancer_type = 'non-small cell lung "
       "cancer' AND ici_class = 'PD-L1'"},
      {"Which PD-1 plus CTLA-4 combination trials started in 2015 or later?",
       "SELECT nct_id, start_year, status FROM trials WHERE ici_class = 'PD-1 + CTLA-4' AND "
       "start_year >= 2015"},
      {"Which phase 3 trials enrolled at least 500 patients?",
       "SELECT nct_id, cancer_type, enrollment FROM trials WHERE enrollment >= 500 AND phase = 3"},
      {"Which renal cell carcinoma trials have at least a year of median follow-up?",
       "SELECT nct_id, primary_endpoint, median_followup_months FROM trials WHERE cancer_type = "
       "'renal cell carcinoma' AND median_followup_months >= 12"},
      {"Which phase 2 trials are currently recruiting?",
       "SELECT nct_id, ici_class FROM trials WHERE status = 'Recruiting' AND phase = 2"},
      {"Which trials started in 2019?",
       "SELECT nct_id, cancer_type, phase, start_year FROM trials WHERE start_year = 2019"},
      {"Which urothelial carcinoma trials enrolled fewer than 400 patients and were not "
       "terminated?",
       "SELECT nct_id, enrollment, status FROM trials WHERE cancer_type = 'urothelial carcinoma' "
       "AND enrollment < 400 AND status != 'Terminated'"},
      {"Which phase 2 or later PD-1 trials use progression-free survival as the primary "
       "endpoint?",
       "SELECT nct_id, cancer_type, ici_class FROM trials WHERE primary_endpoint = 'PFS' AND "
       "ici_class = 'PD-1' AND phase >= 2"},
      {"Which cancer type and checkpoint class combinations appear in phase 1 trials?",
       "SELECT DISTINCT cancer_type, ici_class FROM trials WHERE phase = 1"},
      {"Which melanoma trials started between 2016 and 2020?",
       "SELECT nct_id, start_year, enrollment FROM trials WHERE start_year BETWEEN 2016 AND 2020 "
       "AND cancer_type = 'melanoma'"},
      {"Which completed trials have less than 18 months of median follow-up?",
       "SELECT nct_id, cancer_type, median_followup_months FROM trials WHERE "
       "median_followup_months < 18 AND status = 'Completed'"},
      {"What phases and endpoints do hepatocellular carcinoma trials use?",
       "SELECT nct_id, phase, primary_endpoint FROM trials WHERE cancer_type = 'hepatocellular "
       "carcinoma'"},
      {"Which CTLA-4 trials with more than 100 patients started in 2017 or earlier?",
       "SELECT nct_id, ici_class, enrollment, start_year FROM trials WHERE enrollment > 100 AND "
       "start_year <= 2017 AND ici_class = 'CTLA-4'"},
      {"Which phase 2 trials study a carcinoma?",
       "SELECT nct_id, cancer_type, status FROM trials WHERE cancer_type LIKE '%carcinoma%' AND "
       "phase = 2"},
      {"What is the mean enrollment per checkpoint class for trials starting in 2018 or later?",
       "SELECT ici_class, avg(enrollment) AS mean_enrollment FROM trials WHERE start_year >= "
       "2018 GROUP BY ici_class"},
      {"Which response-rate trials enrolled at most 200 patients?",
       "SELECT nct_id, enrollment, primary_endpoint FROM trials WHERE primary_endpoint = 'ORR' "
       "AND enrollment <= 200"},
      {"Which trials are phase 1 or phase 4?",
       "SELECT nct_id, cancer_type, phase FROM trials WHERE phase = 4 OR phase = 1"},
      {"Which PD-L1 trials started after 2012 with at least 20 months of median follow-up?",
       "SELECT nct_id, start_year, median_followup_months FROM trials WHERE ici_class = 'PD-L1' "
       "AND median_followup_months >= 20 AND start_year > 2012"},
      {"Which trials are active but no longer recruiting?",
       "SELECT nct_id, cancer_type, ici_class, status FROM trials WHERE status = 'Active, not "
       "recruiting'"},
      {"What are the ten largest trials with more than 250 patients?",
       "SELECT nct_id, cancer_type, enrollment FROM trials WHERE enrollment > 250 ORDER BY "
       "enrollment DESC LIMIT 10"},
  };
  return v;
}

}  // namespace fdnl2sql::schema
