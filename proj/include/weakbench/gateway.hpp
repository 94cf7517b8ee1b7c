#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "weakbench/types.hpp"

namespace weakbench::gateway {

struct CompletionRequest {
    std::string provider_id;
    std::string model_name;
    std::string system_prompt;
    std::string user_prompt;
    DecodingConfig decoding;

    void validate() const;

    /// Stable content digest over model, prompts and decoding. Credentials
    /// and provider identity stay out so a warm cache can replay a run even
    /// after the provider block is swapped.
    std::string digest() const;

    /// Canonical text the mock script's substring matchers see.
    std::string matcher_text() const;
};

struct CompletionResponse {
    std::string text;
    bool cache_hit = false;
    double latency_ms = 0.0;
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

enum class ProviderKind { http_chat, mock_script, replay_cache };

ProviderKind provider_kind_from_string(std::string_view s);

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_ms = 50;
};

struct ProviderConfig {
    std::string id;
    ProviderKind kind = ProviderKind::mock_script;
    // http_chat
    std::string endpoint;                            // http://host:port
    std::string api_path = "/v1/chat/completions";
    std::string api_key_env;                         // credential env var name
    RetryPolicy retry;
    bool send_extensions = true;  // top_k / repetition_penalty passthrough
    // mock_script
    std::string script_path;
    bool require_all_entries_used = false;
    // common
    int parallelism = 4;
    int timeout_s = 120;

    void validate() const;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
    virtual const ProviderConfig& config() const = 0;
};

/// Scripted backend: ordered list of (digest | prompt-substring) matchers,
/// first match wins. An unmatched request is always an error.
class MockScriptProvider : public Provider {
public:
    explicit MockScriptProvider(ProviderConfig config);

    CompletionResponse complete(const CompletionRequest& request) override;
    const ProviderConfig& config() const override { return config_; }

    /// Errors when require_all_entries_used is set and entries never fired.
    void check_all_entries_used() const;

private:
    struct Entry {
        std::optional<std::string> digest;
        std::optional<std::string> contains;
        std::string response;
    };
    ProviderConfig config_;
    std::vector<Entry> entries_;
    mutable std::mutex mutex_;
    std::vector<bool> used_;
};

/// OpenAI-compatible chat-completions client with transient-failure retry.
class HttpChatProvider : public Provider {
public:
    explicit HttpChatProvider(ProviderConfig config);

    CompletionResponse complete(const CompletionRequest& request) override;
    const ProviderConfig& config() const override { return config_; }

private:
    ProviderConfig config_;
    std::atomic<bool> extensions_rejected_{false};
};

/// Serves nothing: with this provider every request must come from the
/// response cache, so a replay run provably makes no network calls.
class ReplayCacheProvider : public Provider {
public:
    explicit ReplayCacheProvider(ProviderConfig config) : config_(std::move(config)) {}
    CompletionResponse complete(const CompletionRequest& request) override;
    const ProviderConfig& config() const override { return config_; }

private:
    ProviderConfig config_;
};

std::shared_ptr<Provider> make_provider(const ProviderConfig& config);

/// Content-addressed response cache: one digest-named file per response,
/// written atomically, first write wins.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<std::string> get(const std::string& digest) const;
    void put(const std::string& digest, const std::string& text);

private:
    std::filesystem::path dir_;
};

struct BatchItem {
    bool ok = false;
    CompletionResponse response;
    std::string error;
};

/// Uniform completion front door: cache lookup, provider dispatch, bounded
/// parallel batches, and a provider-call counter for replay assertions.
class Gateway {
public:
    Gateway(std::shared_ptr<Provider> provider, std::shared_ptr<ResponseCache> cache = nullptr);

    CompletionResponse complete(const CompletionRequest& request);

    /// Responses come back in input order regardless of completion order.
    /// Per-item failures are isolated unless fail_fast is set.
    std::vector<BatchItem> complete_batch(const std::vector<CompletionRequest>& requests,
                                          int parallelism, bool fail_fast = false);

    uint64_t provider_calls() const { return provider_calls_.load(); }
    const Provider& provider() const { return *provider_; }

private:
    std::shared_ptr<Provider> provider_;
    std::shared_ptr<ResponseCache> cache_;
    std::atomic<uint64_t> provider_calls_{0};

    // Hard bound on in-flight provider calls, shared across stages.
    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    int slots_in_use_ = 0;
};

/// Spec-named free function; forwards to CompletionRequest::digest().
std::string request_digest(const CompletionRequest& request);

}  // namespace weakbench::gateway
