#include <nlohmann/json.hpp>

#include "weakbench/error.hpp"
#include "weakbench/gateway.hpp"
#include "weakbench/store.hpp"

namespace weakbench::gateway {

using nlohmann::json;

MockScriptProvider::MockScriptProvider(ProviderConfig config) : config_(std::move(config)) {
    json script;
    try {
        script = json::parse(read_file(config_.script_path));
    } catch (const json::exception& e) {
        throw ConfigError("mock script " + config_.script_path + ": " + e.what());
    }
    if (script.contains("require_all_entries_used"))
        config_.require_all_entries_used = script.at("require_all_entries_used").get<bool>();
    for (const auto& item : script.at("entries")) {
        Entry entry;
        if (item.contains("digest")) entry.digest = item.at("digest").get<std::string>();
        if (item.contains("contains")) entry.contains = item.at("contains").get<std::string>();
        if (!entry.digest && !entry.contains)
            throw ConfigError("mock script entry needs a digest or contains matcher");
        entry.response = item.at("response").get<std::string>();
        entries_.push_back(std::move(entry));
    }
    used_.assign(entries_.size(), false);
}

CompletionResponse MockScriptProvider::complete(const CompletionRequest& request) {
    const std::string digest = request.digest();
    const std::string text = request.matcher_text();
    for (size_t i = 0; i < entries_.size(); ++i) {
        const Entry& entry = entries_[i];
        bool matched = false;
        if (entry.digest) matched = *entry.digest == digest;
        else matched = text.find(*entry.contains) != std::string::npos;
        if (matched) {
            {
                std::lock_guard lock(mutex_);
                used_[i] = true;
            }
            CompletionResponse response;
            response.text = entry.response;
            response.prompt_tokens = static_cast<int>(text.size() / 4);
            response.completion_tokens = static_cast<int>(entry.response.size() / 4);
            return response;
        }
    }
    throw GatewayError("mock-script miss: no entry matches request " + digest +
                       " (model " + request.model_name + ")");
}

void MockScriptProvider::check_all_entries_used() const {
    if (!config_.require_all_entries_used) return;
    std::lock_guard lock(mutex_);
    for (size_t i = 0; i < used_.size(); ++i) {
        if (!used_[i])
            throw GatewayError("mock script entry " + std::to_string(i) + " was never matched");
    }
}

}  // namespace weakbench::gateway
