#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "weakbench/forge.hpp"
#include "weakbench/gateway.hpp"
#include "weakbench/hypogen.hpp"
#include "weakbench/types.hpp"

namespace weakbench::report {

using hypogen::ModelRef;

/// A keyed, fully validated problem ready for evaluation.
struct KeyedProblem {
    Problem problem;  // reference_answer = the key's final answer
    forge::Validation validation = forge::Validation::auto_accepted;
};

/// Joins kept problems with their accepted keys; anything not validated is
/// excluded here and can never reach evaluation.
std::vector<KeyedProblem> keyed_pool(const std::vector<forge::GeneratedProblem>& problems,
                                     const std::vector<forge::AnswerKey>& keys);

/// Seeded uniform sample without replacement; deterministic for a fixed
/// seed. Errors when the pool is smaller than m.
std::vector<KeyedProblem> sample_pool(const std::vector<KeyedProblem>& pool, int m,
                                      uint64_t seed);

struct SolveRateResult {
    std::string hypothesis_id;
    std::string hypothesis_text;
    Granularity granularity = Granularity::low;
    int sample_size = 0;
    int correct_count = 0;
    int ungradable_count = 0;
    std::vector<std::string> per_problem;  // problem_id -> grade, aligned with the sample

    double solve_rate() const {
        return sample_size > 0 ? double(correct_count) / double(sample_size) : 0.0;
    }
};

void to_json(nlohmann::json& j, const SolveRateResult& r);
void from_json(const nlohmann::json& j, SolveRateResult& r);

struct EvalOptions {
    DecodingConfig decoding = DecodingConfig::target_defaults();
    int attempts_per_problem = 1;
};

/// Attempts each sampled problem on the target model; a problem counts
/// correct iff any attempt grades correct. Gateway failures grade
/// ungradable (counted wrong) and are flagged in the result.
SolveRateResult evaluate_solve_rate(const std::vector<KeyedProblem>& sample,
                                    const hypogen::Hypothesis& hypothesis,
                                    const ModelRef& target, gateway::Gateway& gw,
                                    const EvalOptions& options);

struct Report {
    std::vector<SolveRateResult> rows;  // grouped by granularity, accuracy-descending
    double baseline_rate = 0.77;
    std::vector<double> row_accuracy;  // hypothesis accuracy per row, same order

    std::string text_table() const;
    std::string results_csv() const;
    std::string plot_csv() const;
};

/// Orders results into the granularity x hypotheses grouping and attaches
/// the baseline reference value.
Report build_report(const std::vector<SolveRateResult>& results,
                    const std::vector<hypogen::Hypothesis>& hypotheses, double baseline_rate);

/// Percentage with one decimal ("45.0").
std::string percent_one_decimal(double fraction);

/// Parses results_csv back into (granularity, counts) rows; fractions are
/// reconstructed exactly from the count columns.
struct ParsedCsvRow {
    std::string granularity;
    std::string hypothesis_id;
    int correct = 0;
    int sample_size = 0;
    std::string solve_rate_pct;
};
std::vector<ParsedCsvRow> parse_results_csv(const std::string& csv);

}  // namespace weakbench::report
