#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdnl2sql/error.hpp"

namespace fdnl2sql::provider {

enum class PromptKind { ZeroShot, FewShot, Cot, Decompose, Synthesize, Sql2Nl, Other };

/// File stem / JSON name: zero_shot, few_shot, cot, decompose, synthesize, sql2nl, other.
std::string_view to_string(PromptKind k);

struct GenerationRequest {
  std::string prompt;
  int max_tokens = 512;
  double temperature = 0.0;
  bool want_logprobs = false;
  PromptKind task = PromptKind::Other;
};

struct GenerationResponse {
  std::string text;
  /// Natural-log token probabilities, each <= 0; absent when the provider
  /// does not report them.
  std::optional<std::vector<double>> token_logprobs;
  /// Token strings parallel to token_logprobs, when known.
  std::optional<std::vector<std::string>> tokens;
};

class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& detail) : Error("provider_error", detail) {}

 protected:
  ProviderError(std::string code, const std::string& detail) : Error(std::move(code), detail) {}
};

class ProviderTimeout : public ProviderError {
 public:
  explicit ProviderTimeout(const std::string& detail) : ProviderError("provider_timeout", detail) {}
};

class EmptyText : public Error {
 public:
  EmptyText() : Error("empty_text", "cannot embed empty text") {}
};

class GenerationProvider {
 public:
  virtual ~GenerationProvider() = default;
  virtual GenerationResponse generate(const GenerationRequest& req) const = 0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<double> embed(const std::string& text) const = 0;
  virtual std::size_t dim() const = 0;
};

struct ProviderConfig {
  std::string provider_url;  // empty: in-process mock
  std::string provider_key;
  std::string provider_model = "default";
  std::string embed_url;  // empty: hashed trigram embedder
  std::string embed_model = "default";
  std::size_t embed_dim = 256;
  int timeout_ms = 30000;
  std::string prompt_dir;

  /// Reads FDNL2SQL_PROVIDER_URL, _PROVIDER_KEY, _PROVIDER_MODEL, _EMBED_URL,
  /// _EMBED_MODEL, _EMBED_DIM, _PROVIDER_TIMEOUT_MS and _PROMPT_DIR.
  static ProviderConfig from_env();
};

/// Front door for both services. Validates what comes back: log
/// probabilities must be <= 0 and embeddings leave here L2-normalized.
class Gateway {
 public:
  Gateway(std::shared_ptr<const GenerationProvider> gen,
          std::shared_ptr<const EmbeddingProvider> emb);

  GenerationResponse generate(const GenerationRequest& req) const;
  std::vector<double> embed(std::string_view text) const;
  std::size_t embed_dim() const { return emb_->dim(); }

  const GenerationProvider& generator() const { return *gen_; }

 private:
  std::shared_ptr<const GenerationProvider> gen_;
  std::shared_ptr<const EmbeddingProvider> emb_;
};

/// Remote adapters where URLs are configured, mock / hashed embedder
/// otherwise.
Gateway make_gateway(const ProviderConfig& cfg);

void normalize_l2(std::vector<double>& v);

}  // namespace fdnl2sql::provider
