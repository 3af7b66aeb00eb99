#pragma once

#include "fdnl2sql/provider/gateway.hpp"

namespace fdnl2sql::provider {

/// OpenAI-compatible chat completions: POST <url>/chat/completions.
class OpenAiChatProvider : public GenerationProvider {
 public:
  explicit OpenAiChatProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) {}
  GenerationResponse generate(const GenerationRequest& req) const override;

 private:
  ProviderConfig cfg_;
};

/// OpenAI-compatible embeddings: POST <url>/embeddings.
class OpenAiEmbedder : public EmbeddingProvider {
 public:
  explicit OpenAiEmbedder(ProviderConfig cfg) : cfg_(std::move(cfg)) {}
  std::vector<double> embed(const std::string& text) const override;
  std::size_t dim() const override { return cfg_.embed_dim; }

 private:
  ProviderConfig cfg_;
};

}  // namespace fdnl2sql::provider
