#include <chrono>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "weakbench/error.hpp"
#include "weakbench/gateway.hpp"

namespace weakbench::gateway {

using nlohmann::json;

HttpChatProvider::HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {
    config_.validate();
}

namespace {

bool is_transient(int status) { return status == 429 || (status >= 500 && status < 600); }

bool names_extension(const std::string& body) {
    return body.find("top_k") != std::string::npos ||
           body.find("repetition_penalty") != std::string::npos;
}

}  // namespace

CompletionResponse HttpChatProvider::complete(const CompletionRequest& request) {
    httplib::Client client(config_.endpoint);
    client.set_read_timeout(config_.timeout_s, 0);
    client.set_connection_timeout(config_.timeout_s, 0);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    auto build_body = [&](bool with_extensions) {
        json body{{"model", request.model_name},
                  {"messages",
                   json::array({json{{"role", "system"}, {"content", request.system_prompt}},
                                json{{"role", "user"}, {"content", request.user_prompt}}})},
                  {"temperature", request.decoding.temperature},
                  {"top_p", request.decoding.top_p},
                  {"max_tokens", request.decoding.max_tokens}};
        if (request.decoding.seed) body["seed"] = *request.decoding.seed;
        if (with_extensions) {
            body["top_k"] = request.decoding.top_k;
            body["repetition_penalty"] = request.decoding.repetition_penalty;
        }
        return body.dump();
    };

    std::string last_error;
    for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
        if (attempt > 1)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.retry.backoff_ms * (attempt - 1)));

        bool send_ext = config_.send_extensions && !extensions_rejected_.load();
        auto start = std::chrono::steady_clock::now();
        auto res = client.Post(config_.api_path, headers, build_body(send_ext),
                               "application/json");
        auto elapsed = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();

        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            json payload;
            try {
                payload = json::parse(res->body);
                CompletionResponse response;
                response.text =
                    payload.at("choices").at(0).at("message").at("content").get<std::string>();
                response.latency_ms = elapsed;
                if (payload.contains("usage")) {
                    const auto& usage = payload["usage"];
                    response.prompt_tokens = usage.value("prompt_tokens", 0);
                    response.completion_tokens = usage.value("completion_tokens", 0);
                }
                return response;
            } catch (const json::exception& e) {
                throw GatewayError(std::string("malformed completion payload: ") + e.what());
            }
        }
        if (res->status == 400 && send_ext && names_extension(res->body)) {
            // Endpoint rejects the pass-through sampling fields; resend without them.
            extensions_rejected_.store(true);
            std::cerr << "[weakbench] warning: endpoint " << config_.endpoint
                      << " rejects top_k/repetition_penalty; dropping them\n";
            --attempt;  // the stripped resend is not a retry
            continue;
        }
        if (is_transient(res->status)) {
            last_error = "http " + std::to_string(res->status) + ": " + res->body;
            continue;
        }
        throw GatewayError("provider error http " + std::to_string(res->status) + ": " +
                           res->body);
    }
    throw GatewayError("request failed after " + std::to_string(config_.retry.max_attempts) +
                       " attempts: " + last_error);
}

}  // namespace weakbench::gateway
