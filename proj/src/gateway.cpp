#include "weakbench/gateway.hpp"

#include <chrono>
#include <thread>

#include <nlohmann/json.hpp>

#include "weakbench/digest.hpp"
#include "weakbench/error.hpp"
#include "weakbench/store.hpp"

namespace weakbench::gateway {

using nlohmann::json;

void CompletionRequest::validate() const {
    if (model_name.empty()) throw ConfigError("completion request: empty model name");
    if (system_prompt.empty() && user_prompt.empty())
        throw ConfigError("completion request: both prompts empty");
    decoding.validate();
}

std::string CompletionRequest::digest() const {
    json canon{{"model", model_name},
               {"system", system_prompt},
               {"user", user_prompt},
               {"decoding", decoding}};
    return sha256_hex(canon.dump());
}

std::string CompletionRequest::matcher_text() const {
    return "model: " + model_name + "\n[system]\n" + system_prompt + "\n[user]\n" + user_prompt;
}

std::string request_digest(const CompletionRequest& request) { return request.digest(); }

ProviderKind provider_kind_from_string(std::string_view s) {
    if (s == "http_chat") return ProviderKind::http_chat;
    if (s == "mock_script") return ProviderKind::mock_script;
    if (s == "replay_cache") return ProviderKind::replay_cache;
    throw ConfigError("unknown provider kind: " + std::string(s));
}

void ProviderConfig::validate() const {
    if (parallelism < 1) throw ConfigError("provider " + id + ": parallelism must be >= 1");
    if (retry.max_attempts < 1) throw ConfigError("provider " + id + ": max_attempts must be >= 1");
    if (kind == ProviderKind::http_chat && endpoint.empty())
        throw ConfigError("provider " + id + ": http_chat needs an endpoint");
    if (kind == ProviderKind::mock_script && script_path.empty())
        throw ConfigError("provider " + id + ": mock_script needs a script path");
}

CompletionResponse ReplayCacheProvider::complete(const CompletionRequest& request) {
    throw GatewayError("replay-cache miss: request " + request.digest() +
                       " was not in the response cache");
}

std::shared_ptr<Provider> make_provider(const ProviderConfig& config) {
    config.validate();
    switch (config.kind) {
        case ProviderKind::mock_script: return std::make_shared<MockScriptProvider>(config);
        case ProviderKind::http_chat: return std::make_shared<HttpChatProvider>(config);
        case ProviderKind::replay_cache: return std::make_shared<ReplayCacheProvider>(config);
    }
    throw ConfigError("unreachable provider kind");
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::optional<std::string> ResponseCache::get(const std::string& digest) const {
    auto path = dir_ / (digest + ".json");
    if (!std::filesystem::exists(path)) return std::nullopt;
    json j = json::parse(read_file(path));
    return j.at("text").get<std::string>();
}

void ResponseCache::put(const std::string& digest, const std::string& text) {
    auto path = dir_ / (digest + ".json");
    if (std::filesystem::exists(path)) return;  // first write wins
    json j{{"digest", digest}, {"text", text}};
    write_file_atomic(path, j.dump() + "\n");
}

Gateway::Gateway(std::shared_ptr<Provider> provider, std::shared_ptr<ResponseCache> cache)
    : provider_(std::move(provider)), cache_(std::move(cache)) {
    if (!provider_) throw ConfigError("gateway needs a provider");
}

CompletionResponse Gateway::complete(const CompletionRequest& request) {
    request.validate();
    const std::string digest = request.digest();
    if (cache_) {
        if (auto hit = cache_->get(digest)) {
            CompletionResponse response;
            response.text = *hit;
            response.cache_hit = true;
            return response;
        }
    }
    {
        std::unique_lock lock(slots_mutex_);
        slots_cv_.wait(lock, [&] { return slots_in_use_ < provider_->config().parallelism; });
        ++slots_in_use_;
    }
    provider_calls_.fetch_add(1);
    CompletionResponse response;
    try {
        response = provider_->complete(request);
    } catch (...) {
        {
            std::lock_guard lock(slots_mutex_);
            --slots_in_use_;
        }
        slots_cv_.notify_one();
        throw;
    }
    {
        std::lock_guard lock(slots_mutex_);
        --slots_in_use_;
    }
    slots_cv_.notify_one();
    if (cache_) cache_->put(digest, response.text);
    return response;
}

std::vector<BatchItem> Gateway::complete_batch(const std::vector<CompletionRequest>& requests,
                                               int parallelism, bool fail_fast) {
    if (parallelism < 1) throw ConfigError("complete_batch: parallelism must be >= 1");
    if (parallelism > provider_->config().parallelism)
        throw ConfigError("complete_batch: parallelism exceeds provider limit");
    std::vector<BatchItem> results(requests.size());
    if (requests.empty()) return results;

    std::atomic<size_t> next{0};
    std::atomic<bool> abort{false};
    auto worker = [&] {
        for (;;) {
            if (fail_fast && abort.load()) return;
            size_t i = next.fetch_add(1);
            if (i >= requests.size()) return;
            try {
                results[i].response = complete(requests[i]);
                results[i].ok = true;
            } catch (const std::exception& e) {
                results[i].error = e.what();
                if (fail_fast) abort.store(true);
            }
        }
    };

    size_t nthreads = std::min<size_t>(static_cast<size_t>(parallelism), requests.size());
    std::vector<std::thread> threads;
    threads.reserve(nthreads);
    for (size_t t = 0; t < nthreads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (fail_fast) {
        for (size_t i = 0; i < results.size(); ++i) {
            if (!results[i].ok && !results[i].error.empty())
                throw GatewayError("batch item " + std::to_string(i) + ": " + results[i].error);
        }
    }
    return results;
}

}  // namespace weakbench::gateway
