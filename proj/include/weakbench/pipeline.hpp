#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "weakbench/benchmark.hpp"
#include "weakbench/forge.hpp"
#include "weakbench/gateway.hpp"
#include "weakbench/hypogen.hpp"
#include "weakbench/report.hpp"
#include "weakbench/store.hpp"
#include "weakbench/types.hpp"

namespace weakbench::pipeline {

using hypogen::ModelRef;

/// Declarative run configuration; a single JSON document with every stage
/// knob pre-filled with the benchmark-paper defaults.
struct PipelineConfig {
    std::filesystem::path base_dir;  // directory of the config file
    std::string run_id = "run";
    std::filesystem::path store_root = "runs";
    std::filesystem::path cache_dir = "cache";

    std::vector<gateway::ProviderConfig> providers;
    ModelRef target;
    ModelRef hypothesis_model;
    ModelRef generator;                // defaults to target
    ModelRef judge;                    // defaults to generator
    std::vector<ModelRef> solvers;

    std::string benchmark_path;
    BenchmarkFormat benchmark_format = BenchmarkFormat::jsonl;

    std::vector<Granularity> granularities;
    std::filesystem::path prompt_dir;
    std::filesystem::path taxonomy_dir;
    std::filesystem::path generation_template_path;

    // filter
    int attempts_k = 5;
    DecodingConfig filter_decoding = DecodingConfig::target_defaults();
    int correct_sample_size = -1;  // -1: balanced (= number of failures)
    uint64_t filter_seed = 1;

    // hypothesize
    hypogen::HypogenConfig hypogen;

    // generate
    int generation_n = 30;
    int hypotheses_per_granularity = 2;
    DecodingConfig generation_decoding = DecodingConfig::generation_defaults();
    int generation_parse_retry_budget = 2;
    forge::ScreenRules screen_rules;

    // keys
    forge::KeyRules key_rules;

    // evaluate
    int eval_m = 20;
    int attempts_per_problem = 1;
    uint64_t eval_seed = 3;
    double baseline_rate = 0.77;
    DecodingConfig eval_decoding = DecodingConfig::target_defaults();

    bool auto_accept_majority = false;

    nlohmann::json raw;

    static PipelineConfig load(const std::string& path);
    void validate() const;
    std::string digest() const;
};

struct RunSummary {
    std::vector<std::string> artifacts;
    std::map<std::string, std::string> headlines;
    std::string report_text;
};

/// Executes stages in dependency order against the run store. One pipeline
/// per store root at a time; intra-stage parallelism is the gateway's.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig config);

    RunSummary run(std::vector<Stage> stages);

    /// Interactive review session over the pending answer keys.
    void review_session(std::istream& in, std::ostream& out);

    ArtifactStore& store() { return store_; }
    const PipelineConfig& config() const { return config_; }
    uint64_t provider_calls() const;

    /// The provider behind a model reference (exposed for test assertions).
    gateway::Gateway& gateway_for(const std::string& provider_id);

private:
    void stage_filter();
    void stage_hypothesize();
    void stage_generate();
    void stage_keys();
    void stage_review();
    void stage_evaluate();
    void stage_report(RunSummary& summary);

    nlohmann::json require_artifact(const std::string& name, std::string_view upstream_stage);
    void record_manifest(Stage stage, const std::string& started,
                         nlohmann::json stage_config);
    void write_output(const std::string& filename, const std::string& content);

    PipelineConfig config_;
    ArtifactStore store_;
    std::shared_ptr<gateway::ResponseCache> cache_;
    std::map<std::string, std::unique_ptr<gateway::Gateway>> gateways_;
    RunSummary summary_;
};

}  // namespace weakbench::pipeline
