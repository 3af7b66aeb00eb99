#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdnl2sql/error.hpp"
#include "fdnl2sql/exec/executor.hpp"

namespace fdnl2sql::metrics {

using exec::Cell;
using exec::ResultTable;

struct MetricWeights {
  double w_select = 0.5;
  double w_where = 0.4;
  double w_from = 0.1;
};

/// pred_index[g] is the predicted column paired with gold column g.
struct Alignment {
  std::vector<std::size_t> pred_index;
};

/// Case-folded, non-alphanumerics stripped.
std::string normalize_column_name(std::string_view name);

/// Equal normalized names pair first; the rest pair positionally in order.
/// nullopt when the column counts differ.
std::optional<Alignment> align_columns(const ResultTable& pred, const ResultTable& gold);

/// null -> "∅"; numbers (and numeric text) -> at most 12 significant
/// digits, no trailing zeros, integral values without a point; other text
/// -> trimmed, whitespace-collapsed, lower-cased.
std::string canonicalize_cell(const Cell& c);

/// 1/0 for numbers within 1e-9 + 1e-6·max(|a|,|b|), token-set F1 for text.
double cell_similarity(const Cell& a, const Cell& b);

double execution_exact_match(const ResultTable& pred, const ResultTable& gold);

struct RowPair {
  std::size_t pred = 0;
  std::size_t gold = 0;
  double sim = 0.0;
};

double row_similarity(const ResultTable& pred, std::size_t pr, const ResultTable& gold,
                      std::size_t gr, const std::optional<Alignment>& al);

/// Greedy one-to-one matching: pairs in descending similarity, ties by
/// (pred index, gold index); zero-similarity pairs are never matched.
/// Returned in the order they were chosen.
std::vector<RowPair> match_rows(const ResultTable& pred, const ResultTable& gold);

double execution_f1(const ResultTable& pred, const ResultTable& gold);

/// Strings fed to chrF: matched row pairs in match order, then unmatched
/// predicted rows (pred side) and unmatched gold rows (gold side). Cells
/// are canonical forms joined by "|", rows joined by "\n".
std::pair<std::string, std::string> chrf_strings(const ResultTable& pred, const ResultTable& gold);

double chrf(const ResultTable& pred, const ResultTable& gold);

/// Clause-weighted token F1 in [0, 100]; nullopt when either side fails
/// to parse.
std::optional<double> ast_similarity(std::string_view pred_sql, std::string_view gold_sql,
                                     const MetricWeights& w = {});

/// Per-sample values: eem in {0,1}, ef1 and conf in [0,1], chrf and ast
/// in [0,100]. Aggregates put everything on the 0..100 scale.
struct MetricReport {
  double chrf = 0.0;
  double eem = 0.0;
  double ef1 = 0.0;
  std::optional<double> ast;
  std::optional<double> conf;
  std::optional<double> hm;
  std::vector<std::string> flags;
  std::map<std::string, int> flag_counts;  // aggregates only
  std::size_t samples = 1;
};

struct SampleOutcome {
  std::optional<ResultTable> pred;  // absent when the prediction failed
  ResultTable gold;
  std::string pred_sql;
  std::string gold_sql;
  std::optional<double> conf;
  std::vector<std::string> flags;
};

MetricReport score_sample(const SampleOutcome& s, const MetricWeights& w = {});

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("empty_corpus", "no samples to aggregate") {}
};

/// Means on the 0..100 scale; conf only when every sample has it; ast over
/// parseable samples; hm = 3 / (1/conf + 1/ef1 + 1/eem) when all three are
/// present and positive.
MetricReport aggregate(const std::vector<MetricReport>& reports);

std::optional<double> harmonic_mean(std::optional<double> conf, double ef1, double eem);

}  // namespace fdnl2sql::metrics
