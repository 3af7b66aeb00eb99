#include "fdnl2sql/provider/openai.hpp"

#include <httplib.h>

#include <json.hpp>

namespace fdnl2sql::provider {

namespace {

using nlohmann::json;

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path without trailing slash
};

Endpoint split_url(const std::string& url) {
  auto scheme = url.find("://");
  auto path = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, path);
  if (path != std::string::npos) e.prefix = url.substr(path);
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

json post(const std::string& url, const std::string& path, const std::string& key, int timeout_ms,
          const json& body) {
  auto ep = split_url(url);
  httplib::Client client(ep.origin);
  auto to = std::chrono::milliseconds(timeout_ms);
  client.set_connection_timeout(to);
  client.set_read_timeout(to);
  client.set_write_timeout(to);
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
  auto res = client.Post(ep.prefix + path, headers, body.dump(), "application/json");
  if (!res) {
    auto err = res.error();
    auto msg = httplib::to_string(err);
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
      throw ProviderTimeout(url + path + ": " + msg);
    }
    throw ProviderError(url + path + ": " + msg);
  }
  if (res->status < 200 || res->status >= 300) {
    throw ProviderError(url + path + ": HTTP " + std::to_string(res->status));
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProviderError(url + path + ": malformed JSON reply: " + e.what());
  }
}

}  // namespace

GenerationResponse OpenAiChatProvider::generate(const GenerationRequest& req) const {
  json body = {{"model", cfg_.provider_model},
               {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
               {"max_tokens", req.max_tokens},
               {"temperature", req.temperature}};
  if (req.want_logprobs) body["logprobs"] = true;
  auto reply = post(cfg_.provider_url, "/chat/completions", cfg_.provider_key, cfg_.timeout_ms,
                    body);
  GenerationResponse out;
  try {
    const auto& choice = reply.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    out.text = content.is_string() ? content.get<std::string>() : "";
    if (req.want_logprobs && choice.contains("logprobs") && choice["logprobs"].is_object() &&
        choice["logprobs"].contains("content") && choice["logprobs"]["content"].is_array()) {
      std::vector<double> lps;
      std::vector<std::string> toks;
      for (const auto& t : choice["logprobs"]["content"]) {
        lps.push_back(t.at("logprob").get<double>());
        toks.push_back(t.value("token", std::string()));
      }
      out.token_logprobs = std::move(lps);
      out.tokens = std::move(toks);
    }
  } catch (const json::exception& e) {
    throw ProviderError(std::string("unexpected chat reply shape: ") + e.what());
  }
  return out;
}

std::vector<double> OpenAiEmbedder::embed(const std::string& text) const {
  json body = {{"model", cfg_.embed_model}, {"input", text}};
  auto reply = post(cfg_.embed_url, "/embeddings", cfg_.provider_key, cfg_.timeout_ms, body);
  try {
    auto v = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
    if (v.size() != cfg_.embed_dim) {
      throw ProviderError("embedding has dimension " + std::to_string(v.size()) + ", expected " +
                          std::to_string(cfg_.embed_dim));
    }
    return v;
  } catch (const json::exception& e) {
    throw ProviderError(std::string("unexpected embedding reply shape: ") + e.what());
  }
}

}  // namespace fdnl2sql::provider
