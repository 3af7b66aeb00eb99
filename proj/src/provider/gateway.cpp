#include "fdnl2sql/provider/gateway.hpp"

#include <cmath>
#include <cstdlib>

#include "fdnl2sql/provider/embedder.hpp"
#include "fdnl2sql/provider/mock.hpp"
#include "fdnl2sql/provider/openai.hpp"
#include "fdnl2sql/util.hpp"

namespace fdnl2sql::provider {

std::string_view to_string(PromptKind k) {
  switch (k) {
    case PromptKind::ZeroShot:
      return "zero_shot";
    case PromptKind::FewShot:
      return "few_shot";
    case PromptKind::Cot:
      return "cot";
    case PromptKind::Decompose:
      return "decompose";
    case PromptKind::Synthesize:
      return "synthesize";
    case PromptKind::Sql2Nl:
      return "sql2nl";
    case PromptKind::Other:
      return "other";
  }
  return "other";
}

namespace {

std::string env(const char* name, std::string fallback = {}) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace

ProviderConfig ProviderConfig::from_env() {
  ProviderConfig c;
  c.provider_url = env("FDNL2SQL_PROVIDER_URL");
  c.provider_key = env("FDNL2SQL_PROVIDER_KEY");
  c.provider_model = env("FDNL2SQL_PROVIDER_MODEL", c.provider_model);
  c.embed_url = env("FDNL2SQL_EMBED_URL");
  c.embed_model = env("FDNL2SQL_EMBED_MODEL", c.embed_model);
  c.prompt_dir = env("FDNL2SQL_PROMPT_DIR");
  if (auto d = env("FDNL2SQL_EMBED_DIM"); !d.empty()) {
    c.embed_dim = static_cast<std::size_t>(std::stoul(d));
  }
  if (auto t = env("FDNL2SQL_PROVIDER_TIMEOUT_MS"); !t.empty()) c.timeout_ms = std::stoi(t);
  return c;
}

void normalize_l2(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) return;
  for (double& x : v) x /= norm;
}

Gateway::Gateway(std::shared_ptr<const GenerationProvider> gen,
                 std::shared_ptr<const EmbeddingProvider> emb)
    : gen_(std::move(gen)), emb_(std::move(emb)) {}

GenerationResponse Gateway::generate(const GenerationRequest& req) const {
  auto resp = gen_->generate(req);
  if (resp.token_logprobs) {
    for (double& lp : *resp.token_logprobs) {
      if (std::isnan(lp)) throw ProviderError("log-probability is NaN");
      if (lp > 0) {
        // Rounding noise from remote providers; anything larger is a bug.
        if (lp > 1e-6) throw ProviderError("positive log-probability from provider");
        lp = 0.0;
      }
    }
    if (resp.tokens && resp.tokens->size() != resp.token_logprobs->size()) resp.tokens.reset();
  }
  return resp;
}

std::vector<double> Gateway::embed(std::string_view text) const {
  if (util::trim(text).empty()) throw EmptyText();
  auto v = emb_->embed(std::string(text));
  if (v.size() != emb_->dim()) throw ProviderError("embedding dimension mismatch");
  double norm = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw ProviderError("embedding has non-finite components");
    norm += x * x;
  }
  if (norm == 0.0) throw ProviderError("embedding is the zero vector");
  normalize_l2(v);
  return v;
}

Gateway make_gateway(const ProviderConfig& cfg) {
  std::shared_ptr<const GenerationProvider> gen;
  if (cfg.provider_url.empty()) {
    gen = std::make_shared<MockProvider>();
  } else {
    gen = std::make_shared<OpenAiChatProvider>(cfg);
  }
  std::shared_ptr<const EmbeddingProvider> emb;
  if (cfg.embed_url.empty()) {
    emb = std::make_shared<TrigramEmbedder>(cfg.embed_dim);
  } else {
    emb = std::make_shared<OpenAiEmbedder>(cfg);
  }
  return Gateway(std::move(gen), std::move(emb));
}

}  // namespace fdnl2sql::provider
