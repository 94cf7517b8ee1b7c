#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "support/fixture.hpp"
#include "weakbench/gateway.hpp"
#include "weakbench/store.hpp"

namespace weakbench::testfix {

/// Scripted gateway backed by a throwaway mock-script file. Entries match
/// in order: {substring, response} pairs, or {digest, response} via
/// add_digest before build().
class ScriptedBackend {
public:
    explicit ScriptedBackend(int parallelism = 4) : parallelism_(parallelism) {
        dir_ = make_temp_dir("mock");
    }

    ScriptedBackend& add(const std::string& contains, const std::string& response) {
        entries_.push_back({{"contains", contains}, {"response", response}});
        return *this;
    }

    ScriptedBackend& add_digest(const std::string& digest, const std::string& response) {
        entries_.push_back({{"digest", digest}, {"response", response}});
        return *this;
    }

    ScriptedBackend& with_cache() {
        use_cache_ = true;
        return *this;
    }

    gateway::Gateway& gw() {
        if (!gateway_) {
            auto path = dir_ / "script.json";
            write_file_atomic(path, nlohmann::json{{"entries", entries_}}.dump());
            gateway::ProviderConfig config;
            config.id = "mock";
            config.kind = gateway::ProviderKind::mock_script;
            config.script_path = path.string();
            config.parallelism = parallelism_;
            auto cache = use_cache_ ? std::make_shared<gateway::ResponseCache>(dir_ / "cache")
                                    : nullptr;
            gateway_ = std::make_unique<gateway::Gateway>(gateway::make_provider(config), cache);
        }
        return *gateway_;
    }

private:
    std::filesystem::path dir_;
    std::vector<nlohmann::json> entries_;
    int parallelism_;
    bool use_cache_ = false;
    std::unique_ptr<gateway::Gateway> gateway_;
};

}  // namespace weakbench::testfix
