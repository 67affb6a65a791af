#pragma once

// Live providers speaking the lexigen wire protocol:
//
//   POST /v1/complete {prompt, max_tokens, temperature}
//        -> 200 {text, tokens_prompt, tokens_completion}
//   POST /v1/embed    {texts: [..]} -> 200 {vectors: [[..]], dim}
//   errors            4xx/5xx {error}
//
// The credential is sent as "Authorization: Bearer <key>". 429, 5xx and transport
// failures are transient; every other non-200 status is terminal.

#include <chrono>
#include <cstdlib>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "lexigen/error.hpp"
#include "lexigen/providers.hpp"

namespace lexigen {

inline constexpr const char *kApiKeyEnv = "LEXIGEN_API_KEY";

struct Endpoint {
    std::string base_url; // e.g. "http://127.0.0.1:8080"
    std::string api_key;
    std::chrono::seconds timeout{120};
};

// Reads the credential from LEXIGEN_API_KEY; a missing or empty key is terminal.
inline Endpoint endpoint_from_env(std::string base_url) {
    const char *key = std::getenv(kApiKeyEnv);
    if (!key || !*key)
        throw ProviderError(std::string("credential missing: set ") + kApiKeyEnv);
    if (base_url.empty())
        throw ProviderError("live mode needs an endpoint");
    return Endpoint{std::move(base_url), key};
}

namespace detail {

inline nlohmann::json post_json(const Endpoint &ep, const std::string &path,
                                const nlohmann::json &body) {
    httplib::Client client(ep.base_url);
    if (!client.is_valid())
        throw ProviderError("invalid endpoint '" + ep.base_url + "'");
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(ep.timeout);
    client.set_write_timeout(ep.timeout);
    httplib::Headers headers;
    if (!ep.api_key.empty())
        headers.emplace("Authorization", "Bearer " + ep.api_key);

    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res)
        throw TransientError("POST " + path + " failed: " + httplib::to_string(res.error()));

    if (res->status != 200) {
        std::string message = res->body;
        try {
            const auto err = nlohmann::json::parse(res->body);
            if (err.is_object() && err.contains("error") && err["error"].is_string())
                message = err["error"].get<std::string>();
        } catch (const nlohmann::json::exception &) {
        }
        const std::string what =
            "POST " + path + " returned " + std::to_string(res->status) + ": " + message;
        if (res->status == 429 || res->status >= 500)
            throw TransientError(what);
        throw ProviderError(what);
    }
    try {
        return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception &e) {
        throw ProviderError("POST " + path + " returned malformed JSON: " + e.what());
    }
}

} // namespace detail

class HttpCompletionProvider final : public CompletionProvider {
  public:
    explicit HttpCompletionProvider(Endpoint endpoint) : ep_(std::move(endpoint)) {}

    CompletionResult complete(const CompletionRequest &request) override {
        request.validate();
        const nlohmann::json body = {{"prompt", request.prompt},
                                     {"max_tokens", request.max_tokens},
                                     {"temperature", request.temperature}};
        const nlohmann::json j = detail::post_json(ep_, "/v1/complete", body);
        try {
            CompletionResult r;
            r.text = j.at("text").get<std::string>();
            r.tokens_prompt = j.at("tokens_prompt").get<std::uint64_t>();
            r.tokens_completion = j.at("tokens_completion").get<std::uint64_t>();
            return r;
        } catch (const nlohmann::json::exception &e) {
            throw ProviderError(std::string("malformed /v1/complete response: ") + e.what());
        }
    }

  private:
    Endpoint ep_;
};

class HttpEmbeddingProvider final : public EmbeddingProvider {
  public:
    explicit HttpEmbeddingProvider(Endpoint endpoint) : ep_(std::move(endpoint)) {}

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
        if (texts.empty())
            throw std::invalid_argument("embed of an empty list");
        const nlohmann::json body = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
        const nlohmann::json j = detail::post_json(ep_, "/v1/embed", body);

        std::vector<EmbeddingVector> vectors;
        std::size_t dim = 0;
        try {
            vectors = j.at("vectors").get<std::vector<EmbeddingVector>>();
            dim = j.at("dim").get<std::size_t>();
        } catch (const nlohmann::json::exception &e) {
            throw ProviderError(std::string("malformed /v1/embed response: ") + e.what());
        }
        if (vectors.size() != texts.size())
            throw ProviderError("/v1/embed returned " + std::to_string(vectors.size()) +
                                " vectors for " + std::to_string(texts.size()) + " texts");
        if (dim == 0)
            throw ProviderError("/v1/embed reported dim 0");
        for (const auto &v : vectors)
            if (v.size() != dim)
                throw ProviderError("/v1/embed vector length disagrees with dim");

        std::lock_guard lock(mu_);
        if (session_dim_ == 0)
            session_dim_ = dim;
        else if (session_dim_ != dim)
            throw ProviderError("embedding dimension changed within session: " +
                                std::to_string(session_dim_) + " -> " + std::to_string(dim));
        return vectors;
    }

    std::size_t session_dim() const {
        std::lock_guard lock(mu_);
        return session_dim_;
    }

  private:
    Endpoint ep_;
    mutable std::mutex mu_;
    std::size_t session_dim_ = 0;
};

} // namespace lexigen
