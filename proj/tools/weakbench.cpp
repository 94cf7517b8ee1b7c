#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "weakbench/error.hpp"
#include "weakbench/pipeline.hpp"

namespace {

using namespace weakbench;

std::vector<Stage> parse_stage_list(const std::string& csv) {
    std::vector<Stage> stages;
    size_t pos = 0;
    while (pos <= csv.size()) {
        size_t comma = csv.find(',', pos);
        std::string token =
            csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!token.empty()) stages.push_back(stage_from_string(token));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (stages.empty()) throw ConfigError("empty stage list");
    return stages;
}

void print_summary(const pipeline::RunSummary& summary) {
    for (const auto& address : summary.artifacts) std::cout << "artifact: " << address << "\n";
    for (const auto& [key, value] : summary.headlines)
        std::cout << key << ": " << value << "\n";
    if (!summary.report_text.empty()) std::cout << "\n" << summary.report_text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hypothesis-guided math benchmark generation pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string run_id_override;
    std::string provider_override;
    int64_t seed_override = -1;
    int parallelism_override = 0;
    bool auto_accept_majority = false;

    app.add_option("--config", config_path, "Pipeline config file (JSON)")->required();
    app.add_option("--run-id", run_id_override, "Override the configured run id");
    app.add_option("--provider", provider_override,
                   "Route every model through this provider id");
    app.add_option("--seed", seed_override, "Base seed for all stage seeds");
    app.add_option("--parallelism", parallelism_override,
                   "Override provider parallelism limits");
    app.add_flag("--auto-accept-majority", auto_accept_majority,
                 "Accept pending keys that have an agreed candidate (no interactive review)");

    std::string stages_csv = "filter,hypothesize,generate,keys,review,evaluate,report";
    auto* run_cmd = app.add_subcommand("run", "Run the pipeline end to end");
    run_cmd->add_option("--stages", stages_csv, "Comma-separated stage subset");

    auto* filter_cmd = app.add_subcommand("filter", "Stage 1: attempt and filter failures");
    auto* hypothesize_cmd = app.add_subcommand("hypothesize", "Stage 2: hypothesis generation");
    auto* generate_cmd = app.add_subcommand("generate", "Stage 3: problem generation");
    auto* keys_cmd = app.add_subcommand("keys", "Derive answer keys by cross-model agreement");
    auto* review_cmd = app.add_subcommand("review", "Interactive review of pending keys");
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Stage 4: solve-rate evaluation");
    auto* report_cmd = app.add_subcommand("report", "Emit tables and plot data");

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = pipeline::PipelineConfig::load(config_path);
        if (!run_id_override.empty()) config.run_id = run_id_override;
        if (!provider_override.empty()) {
            config.target.provider_id = provider_override;
            config.hypothesis_model.provider_id = provider_override;
            config.generator.provider_id = provider_override;
            config.judge.provider_id = provider_override;
            for (auto& solver : config.solvers) solver.provider_id = provider_override;
        }
        if (seed_override >= 0) {
            config.filter_seed = static_cast<uint64_t>(seed_override);
            config.hypogen.seed = static_cast<uint64_t>(seed_override) + 1;
            config.eval_seed = static_cast<uint64_t>(seed_override) + 2;
        }
        if (parallelism_override > 0) {
            for (auto& provider : config.providers) provider.parallelism = parallelism_override;
        }
        if (auto_accept_majority) config.auto_accept_majority = true;
        config.validate();

        pipeline::Pipeline pipe(std::move(config));

        if (review_cmd->parsed()) {
            pipe.review_session(std::cin, std::cout);
            return 0;
        }

        std::vector<Stage> stages;
        if (run_cmd->parsed()) stages = parse_stage_list(stages_csv);
        else if (filter_cmd->parsed()) stages = {Stage::filter};
        else if (hypothesize_cmd->parsed()) stages = {Stage::hypothesize};
        else if (generate_cmd->parsed()) stages = {Stage::generate};
        else if (keys_cmd->parsed()) stages = {Stage::keys};
        else if (evaluate_cmd->parsed()) stages = {Stage::evaluate};
        else if (report_cmd->parsed()) stages = {Stage::report};

        print_summary(pipe.run(stages));
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
