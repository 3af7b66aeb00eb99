#pragma once

#include "fdnl2sql/provider/gateway.hpp"

namespace fdnl2sql::provider {

/// Offline embedder: lower-cased, whitespace-collapsed text; character
/// trigrams hashed (FNV-1a 64) into `dim` buckets as term frequencies;
/// L2-normalized. Texts shorter than three characters hash as one gram.
class TrigramEmbedder : public EmbeddingProvider {
 public:
  explicit TrigramEmbedder(std::size_t dim = 256) : dim_(dim) {}

  std::vector<double> embed(const std::string& text) const override;
  std::size_t dim() const override { return dim_; }

 private:
  std::size_t dim_;
};

}  // namespace fdnl2sql::provider
