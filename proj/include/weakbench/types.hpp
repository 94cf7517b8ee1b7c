#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "weakbench/answer.hpp"

namespace weakbench {

enum class ProblemOrigin { source_benchmark, generated };

std::string_view to_string(ProblemOrigin origin);
ProblemOrigin problem_origin_from_string(std::string_view s);

/// One source-benchmark or generated math problem.
struct Problem {
    std::string id;  // digest of the whitespace-normalized statement
    std::string statement;
    std::optional<std::string> subject;
    std::optional<std::string> level;
    std::optional<std::string> reference_answer;
    ProblemOrigin origin = ProblemOrigin::source_benchmark;
    std::optional<std::string> source_hypothesis_id;  // required when generated

    static Problem from_statement(std::string statement, ProblemOrigin origin);
    void validate() const;
};

struct DecodingConfig {
    double temperature = 0.6;
    double top_p = 0.9;
    int top_k = 40;
    double repetition_penalty = 1.2;
    int max_tokens = 4096;
    std::optional<int64_t> seed;

    void validate() const;
    bool operator==(const DecodingConfig&) const = default;

    /// Stage-1 / evaluation decoding (the target model's recommended settings).
    static DecodingConfig target_defaults() { return {}; }
    /// Problem-generation decoding (slightly elevated diversity).
    static DecodingConfig generation_defaults() { return {1.0, 0.9, 50, 1.05, 4096, {}}; }
};

struct AttemptRecord {
    std::string problem_id;
    int attempt_index = 0;  // in [0, k)
    std::string raw_output;
    std::optional<std::string> extracted_answer;
    answer::GradeLabel label = answer::GradeLabel::ungradable;
    DecodingConfig decoding;
    std::optional<std::string> error_note;  // set when the gateway call failed
};

/// (problem text, model answer text, correct/wrong label) triple; the unit
/// the hypothesis prompts are rendered from.
struct LabeledObservation {
    std::string problem_text;
    std::string answer_text;
    answer::GradeLabel label = answer::GradeLabel::wrong;  // correct or wrong only

    void validate() const;
};

enum class Granularity { baseline_skills, extremely_low, low, mid, high };

std::string_view to_string(Granularity g);
Granularity granularity_from_string(std::string_view s);
std::vector<Granularity> all_granularities();

/// Concept list a prompt variant permits hypotheses to reference.
struct Taxonomy {
    Granularity granularity = Granularity::low;
    std::vector<std::string> concepts;

    void validate() const;
    static Taxonomy load(const std::string& path);
};

void to_json(nlohmann::json& j, const Problem& p);
void from_json(const nlohmann::json& j, Problem& p);
void to_json(nlohmann::json& j, const DecodingConfig& d);
void from_json(const nlohmann::json& j, DecodingConfig& d);
void to_json(nlohmann::json& j, const AttemptRecord& r);
void from_json(const nlohmann::json& j, AttemptRecord& r);
void to_json(nlohmann::json& j, const LabeledObservation& o);
void from_json(const nlohmann::json& j, LabeledObservation& o);
void to_json(nlohmann::json& j, const Taxonomy& t);
void from_json(const nlohmann::json& j, Taxonomy& t);

}  // namespace weakbench
