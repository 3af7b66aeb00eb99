#include "fdnl2sql/metrics/chrf.hpp"

#include <map>
#include <string>

#include "fdnl2sql/util.hpp"

namespace fdnl2sql::metrics {

namespace {

bool is_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || (c >= 0x1C && c <= 0x20) || c == 0x85 || c == 0xA0 ||
         c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 ||
         c == 0x202F || c == 0x205F || c == 0x3000;
}

std::u32string squeeze(std::string_view s) {
  std::u32string out;
  for (char32_t c : util::utf8_decode(s)) {
    if (!is_space(c)) out += c;
  }
  return out;
}

std::map<std::u32string, long> ngrams(const std::u32string& s, std::size_t n) {
  std::map<std::u32string, long> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++out[s.substr(i, n)];
  return out;
}

}  // namespace

double chrf_score(std::string_view hypothesis, std::string_view reference, int max_order,
                  double beta) {
  auto hyp = squeeze(hypothesis);
  auto ref = squeeze(reference);
  double factor = beta * beta;
  double avg_prec = 0.0;
  double avg_rec = 0.0;
  int effective = 0;
  for (int n = 1; n <= max_order; ++n) {
    auto h = ngrams(hyp, static_cast<std::size_t>(n));
    auto r = ngrams(ref, static_cast<std::size_t>(n));
    long n_hyp = 0;
    long n_ref = 0;
    long n_match = 0;
    for (const auto& [g, c] : h) {
      n_hyp += c;
      if (auto it = r.find(g); it != r.end()) n_match += std::min(c, it->second);
    }
    for (const auto& [g, c] : r) n_ref += c;
    if (r.empty()) n_hyp = 0;
    if (n_hyp > 0 && n_ref > 0) {
      avg_prec += static_cast<double>(n_match) / static_cast<double>(n_hyp);
      avg_rec += static_cast<double>(n_match) / static_cast<double>(n_ref);
      ++effective;
    }
  }
  if (effective == 0) return 0.0;
  avg_prec /= effective;
  avg_rec /= effective;
  if (avg_prec + avg_rec == 0.0) return 0.0;
  double score = (1 + factor) * avg_prec * avg_rec;
  score /= factor * avg_prec + avg_rec;
  return 100.0 * score;
}

}  // namespace fdnl2sql::metrics
