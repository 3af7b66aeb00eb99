#include "fdnl2sql/metrics/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

#include "fdnl2sql/metrics/chrf.hpp"
#include "fdnl2sql/sql/analysis.hpp"
#include "fdnl2sql/sql/parser.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::metrics {

namespace {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  double r = std::strtod(buf, nullptr);
  if (r == std::trunc(r) && std::fabs(r) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", r);
    return buf;
  }
  for (int p = 1; p <= 12; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, r);
    if (std::strtod(buf, nullptr) == r) break;
  }
  return buf;
}

// Plain decimal literal: [+-] digits [. digits] [e [+-] digits].
std::optional<double> parse_number(std::string_view s) {
  s = util::trim(s);
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++digits;
  }
  if (digits == 0) return std::nullopt;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    ++i;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t exp_digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i, ++exp_digits;
    if (exp_digits == 0) return std::nullopt;
  }
  if (i != s.size()) return std::nullopt;
  double v = std::strtod(std::string(s).c_str(), nullptr);
  if (!std::isfinite(v)) return std::nullopt;
  return v;
}

struct Canon {
  enum Kind { Null, Num, Text } kind = Null;
  double num = 0.0;
  std::string text;                 // canonical form
  std::vector<std::string> tokens;  // sorted unique, for Text
};

Canon canon(const Cell& c) {
  Canon out;
  if (exec::is_null(c)) {
    out.text = "∅";
    return out;
  }
  if (const auto* d = std::get_if<double>(&c)) {
    out.kind = Canon::Num;
    out.num = *d;
    out.text = format_number(*d);
    return out;
  }
  const auto& s = std::get<std::string>(c);
  if (auto v = parse_number(s)) {
    out.kind = Canon::Num;
    out.num = *v;
    out.text = format_number(*v);
    return out;
  }
  out.kind = Canon::Text;
  out.text = util::to_lower(util::collapse_whitespace(s));
  std::istringstream in(out.text);
  std::string tok;
  std::set<std::string> uniq;
  while (in >> tok) uniq.insert(tok);
  out.tokens.assign(uniq.begin(), uniq.end());
  return out;
}

std::vector<std::string> token_set(const Canon& c) {
  if (c.kind == Canon::Text) return c.tokens;
  return {c.text};
}

double token_f1(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::size_t common = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++common, ++i, ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return 2.0 * static_cast<double>(common) / static_cast<double>(a.size() + b.size());
}

double canon_similarity(const Canon& a, const Canon& b) {
  if (a.kind == Canon::Null || b.kind == Canon::Null) {
    return a.kind == Canon::Null && b.kind == Canon::Null ? 1.0 : 0.0;
  }
  if (a.kind == Canon::Num && b.kind == Canon::Num) {
    double tol = 1e-9 + 1e-6 * std::max(std::fabs(a.num), std::fabs(b.num));
    return std::fabs(a.num - b.num) <= tol ? 1.0 : 0.0;
  }
  if (a.kind == Canon::Text && b.kind == Canon::Text) return token_f1(a.tokens, b.tokens);
  return token_f1(token_set(a), token_set(b));
}

using Prepared = std::vector<std::vector<Canon>>;

Prepared prepare(const ResultTable& t) {
  Prepared out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    std::vector<Canon> r;
    r.reserve(row.size());
    for (const auto& c : row) r.push_back(canon(c));
    out.push_back(std::move(r));
  }
  return out;
}

double prepared_row_similarity(const std::vector<Canon>& p, const std::vector<Canon>& g,
                               const std::optional<Alignment>& al) {
  if (al) {
    if (g.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) sum += canon_similarity(p[al->pred_index[k]], g[k]);
    return sum / static_cast<double>(g.size());
  }
  auto m = std::min(p.size(), g.size());
  if (m == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) sum += canon_similarity(p[k], g[k]);
  return sum / static_cast<double>(m);
}

std::vector<RowPair> greedy(const Prepared& p, const Prepared& g,
                            const std::optional<Alignment>& al) {
  std::vector<RowPair> cand;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      double s = prepared_row_similarity(p[i], g[j], al);
      if (s > 0.0) cand.push_back({i, j, s});
    }
  }
  std::sort(cand.begin(), cand.end(), [](const RowPair& a, const RowPair& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    if (a.pred != b.pred) return a.pred < b.pred;
    return a.gold < b.gold;
  });
  std::vector<bool> used_p(p.size()), used_g(g.size());
  std::vector<RowPair> out;
  for (const auto& c : cand) {
    if (used_p[c.pred] || used_g[c.gold]) continue;
    used_p[c.pred] = used_g[c.gold] = true;
    out.push_back(c);
  }
  return out;
}

std::string serialize_row(const std::vector<Canon>& row, const std::optional<Alignment>& al) {
  std::string out;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (k) out += '|';
    out += al ? row[al->pred_index[k]].text : row[k].text;
  }
  return out;
}

double clause_f1(const sql::TokenBag& a, const sql::TokenBag& b) {
  auto na = sql::bag_size(a);
  auto nb = sql::bag_size(b);
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(sql::bag_overlap(a, b)) / static_cast<double>(na + nb);
}

}  // namespace

std::string normalize_column_name(std::string_view name) {
  std::string out;
  for (char c : name) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) out += static_cast<char>(std::tolower(u));
  }
  return out;
}

std::optional<Alignment> align_columns(const ResultTable& pred, const ResultTable& gold) {
  if (pred.columns.size() != gold.columns.size()) return std::nullopt;
  auto n = gold.columns.size();
  Alignment al;
  al.pred_index.assign(n, n);
  std::vector<bool> used(n, false);
  for (std::size_t g = 0; g < n; ++g) {
    auto gname = normalize_column_name(gold.columns[g]);
    for (std::size_t p = 0; p < n; ++p) {
      if (!used[p] && normalize_column_name(pred.columns[p]) == gname) {
        al.pred_index[g] = p;
        used[p] = true;
        break;
      }
    }
  }
  std::size_t next = 0;
  for (std::size_t g = 0; g < n; ++g) {
    if (al.pred_index[g] != n) continue;
    while (used[next]) ++next;
    al.pred_index[g] = next;
    used[next] = true;
  }
  return al;
}

std::string canonicalize_cell(const Cell& c) { return canon(c).text; }

double cell_similarity(const Cell& a, const Cell& b) {
  return canon_similarity(canon(a), canon(b));
}

double execution_exact_match(const ResultTable& pred, const ResultTable& gold) {
  auto al = align_columns(pred, gold);
  if (!al) return 0.0;
  if (pred.rows.size() != gold.rows.size()) return 0.0;
  std::vector<std::vector<std::string>> a, b;
  for (const auto& row : pred.rows) {
    std::vector<std::string> t;
    for (std::size_t g = 0; g < gold.columns.size(); ++g) {
      t.push_back(canonicalize_cell(row[al->pred_index[g]]));
    }
    a.push_back(std::move(t));
  }
  for (const auto& row : gold.rows) {
    std::vector<std::string> t;
    for (const auto& c : row) t.push_back(canonicalize_cell(c));
    b.push_back(std::move(t));
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b ? 1.0 : 0.0;
}

double row_similarity(const ResultTable& pred, std::size_t pr, const ResultTable& gold,
                      std::size_t gr, const std::optional<Alignment>& al) {
  std::vector<Canon> p, g;
  for (const auto& c : pred.rows[pr]) p.push_back(canon(c));
  for (const auto& c : gold.rows[gr]) g.push_back(canon(c));
  return prepared_row_similarity(p, g, al);
}

std::vector<RowPair> match_rows(const ResultTable& pred, const ResultTable& gold) {
  return greedy(prepare(pred), prepare(gold), align_columns(pred, gold));
}

double execution_f1(const ResultTable& pred, const ResultTable& gold) {
  if (pred.rows.empty() && gold.rows.empty()) return 1.0;
  if (pred.rows.empty() || gold.rows.empty()) return 0.0;
  double total = 0.0;
  for (const auto& m : match_rows(pred, gold)) total += m.sim;
  double p = total / static_cast<double>(pred.rows.size());
  double r = total / static_cast<double>(gold.rows.size());
  return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

std::pair<std::string, std::string> chrf_strings(const ResultTable& pred,
                                                 const ResultTable& gold) {
  auto al = align_columns(pred, gold);
  auto p = prepare(pred);
  auto g = prepare(gold);
  auto matches = greedy(p, g, al);
  std::vector<std::string> ps, gs;
  std::vector<bool> used_p(p.size()), used_g(g.size());
  for (const auto& m : matches) {
    ps.push_back(serialize_row(p[m.pred], al));
    gs.push_back(serialize_row(g[m.gold], std::nullopt));
    used_p[m.pred] = used_g[m.gold] = true;
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!used_p[i]) ps.push_back(serialize_row(p[i], al));
  }
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (!used_g[j]) gs.push_back(serialize_row(g[j], std::nullopt));
  }
  return {util::join(ps, "\n"), util::join(gs, "\n")};
}

double chrf(const ResultTable& pred, const ResultTable& gold) {
  auto [p, g] = chrf_strings(pred, gold);
  if (p.empty() && g.empty()) return 100.0;
  return chrf_score(p, g);
}

std::optional<double> ast_similarity(std::string_view pred_sql, std::string_view gold_sql,
                                     const MetricWeights& w) {
  sql::ClauseTokens a, b;
  try {
    a = sql::clause_tokens(sql::parse_sql(pred_sql));
    b = sql::clause_tokens(sql::parse_sql(gold_sql));
  } catch (const Error&) {
    return std::nullopt;
  }
  return 100.0 * (w.w_select * clause_f1(a.select_tokens, b.select_tokens) +
                  w.w_where * clause_f1(a.where_tokens, b.where_tokens) +
                  w.w_from * clause_f1(a.from_tokens, b.from_tokens));
}

MetricReport score_sample(const SampleOutcome& s, const MetricWeights& w) {
  MetricReport r;
  if (s.pred) {
    r.eem = execution_exact_match(*s.pred, s.gold);
    r.ef1 = execution_f1(*s.pred, s.gold);
    r.chrf = chrf(*s.pred, s.gold);
  }
  r.ast = ast_similarity(s.pred_sql, s.gold_sql, w);
  r.conf = s.conf;
  r.flags = s.flags;
  return r;
}

std::optional<double> harmonic_mean(std::optional<double> conf, double ef1, double eem) {
  if (!conf || *conf <= 0.0 || ef1 <= 0.0 || eem <= 0.0) return std::nullopt;
  return 3.0 / (1.0 / *conf + 1.0 / ef1 + 1.0 / eem);
}

MetricReport aggregate(const std::vector<MetricReport>& reports) {
  if (reports.empty()) throw EmptyCorpus();
  MetricReport out;
  out.samples = reports.size();
  double n = static_cast<double>(reports.size());
  double chrf_sum = 0.0, eem_sum = 0.0, ef1_sum = 0.0, ast_sum = 0.0, conf_sum = 0.0;
  std::size_t ast_n = 0;
  bool all_conf = true;
  for (const auto& r : reports) {
    chrf_sum += r.chrf;
    eem_sum += r.eem;
    ef1_sum += r.ef1;
    if (r.ast) {
      ast_sum += *r.ast;
      ++ast_n;
    }
    if (r.conf) {
      conf_sum += *r.conf;
    } else {
      all_conf = false;
    }
    for (const auto& f : r.flags) ++out.flag_counts[f];
  }
  out.chrf = chrf_sum / n;
  out.eem = 100.0 * eem_sum / n;
  out.ef1 = 100.0 * ef1_sum / n;
  if (ast_n) out.ast = ast_sum / static_cast<double>(ast_n);
  if (all_conf) out.conf = 100.0 * conf_sum / n;
  out.hm = harmonic_mean(out.conf, out.ef1, out.eem);
  for (const auto& [f, c] : out.flag_counts) out.flags.push_back(f);
  return out;
}

}  // namespace fdnl2sql::metrics
