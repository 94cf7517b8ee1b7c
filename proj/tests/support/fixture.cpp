#include "support/fixture.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "weakbench/filter.hpp"
#include "weakbench/forge.hpp"
#include "weakbench/store.hpp"

namespace weakbench::testfix {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path source_dir() { return fs::path(WEAKBENCH_SOURCE_DIR); }
fs::path assets_dir() { return source_dir() / "assets"; }
fs::path fixture_dir() { return assets_dir() / "fixtures" / "table1"; }

fs::path make_temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    fs::path dir = fs::temp_directory_path() /
                   ("weakbench-" + tag + "-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter.fetch_add(1)));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

namespace {

struct HypSpec {
    std::string gran;     // granularity name
    std::string tag;      // marker tag, e.g. "LO1"
    std::string text;     // hypothesis text
    int correct = 0;      // eval: correct answers out of 20
    bool predicts_wrong;  // scripted inference prediction
};

// Table-1 hypothesis pairs. The first of each pair is scripted to predict
// "wrong" on every observation (accuracy 12/20 on the 12w+8c dataset), the
// second "correct" (8/20), so the bank ranks them first/second.
std::vector<HypSpec> hyp_specs() {
    return {
        {"baseline_skills", "BS1",
         "The LLM is likely to fail in problems requiring calculation and conversion skills.", 18,
         true},
        {"baseline_skills", "BS2",
         "The LLM shows difficulty on problems involving coordinate geometry and transformation "
         "skills together with graph understanding and interpretation.",
         19, false},
        {"extremely_low", "XL1",
         "The LLM is likely to fail on problems involving the combination of Geometry and "
         "Algebra.",
         14, true},
        {"extremely_low", "XL2",
         "The LLM is likely to fail on problems involving both Prealgebra and Algebra.", 18,
         false},
        {"low", "LO1",
         "The LLM is likely to fail on problems involving modular arithmetic, divisibility, and "
         "integer properties.",
         9, true},
        {"low", "LO2",
         "The LLM is likely to fail on problems involving spatial reasoning and geometric "
         "theorem application.",
         12, false},
        {"mid", "MD1",
         "The LLM is more error-prone on problems involving function evaluation/composition.", 18,
         true},
        {"mid", "MD2",
         "The LLM is more likely to fail on problems requiring the use of linear & systems "
         "concepts.",
         19, false},
        {"high", "HI1",
         "The LLM is likely to fail in problems involving function evaluation and basic "
         "transformations.",
         11, true},
        {"high", "HI2",
         "The LLM is likely to fail on problems involving integer arithmetic (+,-,*,/).", 19,
         false},
    };
}

// Taxonomy text unique to each granularity's prompt asset, used to route
// propose calls. Generation prompts also contain taxonomy text, so these
// entries must come after the generation matchers.
const char* taxonomy_marker(const std::string& gran) {
    if (gran == "baseline_skills") return "understanding_and_utilizing_infininte_series";
    if (gran == "extremely_low") return "Advanced Auxiliary Topics";
    if (gran == "low") return "graph of GCD";
    if (gran == "mid") return "De-Moivre";
    return "Polyhedron basics";
}

std::string two_digits(int v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", v);
    return buf;
}

std::string generated_statement(const HypSpec& spec, int index) {
    const bool correct = index <= spec.correct;
    const std::string marker = "[GEN-" + spec.tag + "-" + (correct ? "C" : "W") +
                               two_digits(correct ? index : index - spec.correct) + "]";
    return marker + " Compute the value of expression " + std::to_string(index) +
           " for configuration " + spec.tag + ".";
}

}  // namespace

Table1Fixture build_table1_fixture() {
    Table1Fixture fixture;

    // --- benchmark: 12 consistently failed + 12 solved problems ---
    {
        std::string jsonl;
        for (int i = 1; i <= 12; ++i) {
            json record{{"problem", "[SRC-H" + two_digits(i) +
                                        "] Evaluate expression number " + std::to_string(i) +
                                        " and give the value."},
                        {"answer", "7"},
                        {"subject", "Fixture"},
                        {"level", "Level 1"}};
            jsonl += record.dump() + "\n";
        }
        for (int i = 1; i <= 12; ++i) {
            json record{{"problem", "[SRC-E" + two_digits(i) +
                                        "] Simplify quantity number " + std::to_string(i) +
                                        " and give the value."},
                        {"answer", "7"}};
            jsonl += record.dump() + "\n";
        }
        fixture.benchmark_jsonl = jsonl;
    }

    // --- mock script ---
    {
        using filter::ModelRef;
        DecodingConfig decoding;
        const std::string solve_prefix =
            filter::solve_request(ModelRef{"mock", "m"}, "", decoding, 0).user_prompt;
        const std::string solver_prefix =
            forge::solver_request(ModelRef{"mock", "m"}, "", decoding).user_prompt;
        std::string judge_prefix =
            forge::judge_request(ModelRef{"mock", "m"}, "", decoding).user_prompt;
        judge_prefix = judge_prefix.substr(0, judge_prefix.find("\n\nVerdict:"));

        json entries = json::array();
        auto add = [&](const std::string& contains, const std::string& response) {
            entries.push_back(json{{"contains", contains}, {"response", response}});
        };

        // 1. Hypothesis scoring: constant per-hypothesis predictions.
        for (const auto& spec : hyp_specs()) {
            add("Our learned pattern: " + spec.text,
                std::string("The pattern clearly applies to this problem.\nFinal answer: ") +
                    (spec.predicts_wrong ? "wrong" : "correct"));
        }
        // 2. Problem generation: 20 problems per hypothesis.
        for (const auto& spec : hyp_specs()) {
            std::string response;
            for (int i = 1; i <= 20; ++i) {
                if (i > 1) response += "\n\n";
                response += "Problem " + std::to_string(i) + ": " + generated_statement(spec, i);
            }
            add("very likely to fail on:\n    " + spec.text, response);
        }
        // 3. Hypothesis proposal, routed by taxonomy text unique to each
        //    granularity (generation prompts already matched above).
        {
            auto specs = hyp_specs();
            for (size_t i = 0; i < specs.size(); i += 2) {
                add(taxonomy_marker(specs[i].gran),
                    "Proposed hypotheses:\n1. [" + specs[i].text + "]\n2. [" +
                        specs[i + 1].text + "]");
            }
        }
        // 4. Screening judge: everything is valid.
        add(judge_prefix, "valid");
        // 5. Answer keys: every solver agrees on 7.
        add(solver_prefix, "\\boxed{7}");
        // 6. Evaluation of generated problems, grouped by marker prefix.
        for (const auto& spec : hyp_specs()) {
            add(solve_prefix + "[GEN-" + spec.tag + "-C",
                "Working through the steps gives \\boxed{7}.");
            add(solve_prefix + "[GEN-" + spec.tag + "-W",
                "Working through the steps gives \\boxed{0}.");
        }
        // 7. Stage-1 attempts on the source benchmark.
        add(solve_prefix + "[SRC-H", "I believe the result is \\boxed{0}.");
        add(solve_prefix + "[SRC-E", "The computation yields \\boxed{7}.");

        fixture.mock_script_json =
            json{{"require_all_entries_used", false}, {"entries", entries}}.dump(2) + "\n";
    }

    // --- config ---
    {
        json config{
            {"run_id", "table1"},
            {"store_root", "runs"},
            {"cache_dir", "cache"},
            {"providers", json::array({json{{"id", "mock"},
                                            {"kind", "mock_script"},
                                            {"script", "mock_script.json"},
                                            {"parallelism", 8}}})},
            {"models",
             json{{"target", json{{"provider", "mock"}, {"model", "target-llama"}}},
                  {"hypothesis", json{{"provider", "mock"}, {"model", "hypogen-mini"}}},
                  {"solvers",
                   json::array({json{{"provider", "mock"}, {"model", "solver-deep"}},
                                json{{"provider", "mock"}, {"model", "solver-oz"}},
                                json{{"provider", "mock"}, {"model", "solver-five"}}})}}},
            {"benchmark", json{{"path", "benchmark.jsonl"}, {"format", "jsonl"}}},
            {"granularities",
             json::array({"baseline_skills", "extremely_low", "low", "mid", "high"})},
            {"assets", json{{"prompt_dir", "../../prompts"},
                            {"taxonomy_dir", "../../taxonomies"},
                            {"generation_template", "../../prompts/generation.txt"}}},
            {"stages",
             json{{"filter", json{{"k", 5}, {"correct_sample_size", 8}, {"seed", 11}}},
                  {"hypothesize", json{{"num_batches", 1},
                                       {"batch_size", 20},
                                       {"proposals_per_batch", 2},
                                       {"bank_capacity", 15},
                                       {"seed", 7}}},
                  {"generate", json{{"n", 20}, {"hypotheses_per_granularity", 2}}},
                  {"evaluate", json{{"m", 20},
                                    {"attempts_per_problem", 1},
                                    {"seed", 3},
                                    {"baseline_rate", 0.77}}}}},
        };
        fixture.config_json = config.dump(2) + "\n";
    }

    return fixture;
}

void write_table1_fixture(const fs::path& dir) {
    fs::create_directories(dir);
    auto fixture = build_table1_fixture();
    write_file_atomic(dir / "benchmark.jsonl", fixture.benchmark_jsonl);
    write_file_atomic(dir / "mock_script.json", fixture.mock_script_json);
    write_file_atomic(dir / "config.json", fixture.config_json);
}

}  // namespace weakbench::testfix
