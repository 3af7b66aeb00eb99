#include "fdnl2sql/provider/embedder.hpp"

#include "fdnl2sql/util.hpp"

namespace fdnl2sql::provider {

namespace {

std::string utf8_encode(std::u32string_view cps) {
  std::string out;
  for (char32_t c : cps) {
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else if (c < 0x800) {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x10000) {
      out += static_cast<char>(0xE0 | (c >> 12));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (c >> 18));
      out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }
  return out;
}

}  // namespace

std::vector<double> TrigramEmbedder::embed(const std::string& text) const {
  auto cps = util::utf8_decode(util::collapse_whitespace(util::to_lower(text)));
  std::vector<double> v(dim_, 0.0);
  if (cps.empty()) return v;
  auto add = [&](std::u32string_view gram) {
    v[util::fnv1a64(utf8_encode(gram)) % dim_] += 1.0;
  };
  if (cps.size() < 3) {
    add(cps);
  } else {
    for (std::size_t i = 0; i + 3 <= cps.size(); ++i) add(std::u32string_view(cps).substr(i, 3));
  }
  normalize_l2(v);
  return v;
}

}  // namespace fdnl2sql::provider
