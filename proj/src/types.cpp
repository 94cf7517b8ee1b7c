#include "weakbench/types.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "weakbench/digest.hpp"
#include "weakbench/error.hpp"

namespace weakbench {

using nlohmann::json;

std::string_view to_string(ProblemOrigin origin) {
    return origin == ProblemOrigin::source_benchmark ? "source_benchmark" : "generated";
}

ProblemOrigin problem_origin_from_string(std::string_view s) {
    if (s == "source_benchmark") return ProblemOrigin::source_benchmark;
    if (s == "generated") return ProblemOrigin::generated;
    throw ParseError("unknown problem origin: " + std::string(s));
}

Problem Problem::from_statement(std::string statement, ProblemOrigin origin) {
    Problem p;
    p.id = problem_id(statement);
    p.statement = std::move(statement);
    p.origin = origin;
    return p;
}

void Problem::validate() const {
    if (statement.empty()) throw ProtocolError("problem has empty statement");
    if (id != problem_id(statement))
        throw ProtocolError("problem id does not match statement digest: " + id);
    if (origin == ProblemOrigin::generated && !source_hypothesis_id)
        throw ProtocolError("generated problem missing source_hypothesis_id: " + id);
}

void DecodingConfig::validate() const {
    if (temperature < 0) throw ConfigError("decoding: temperature must be >= 0");
    if (!(top_p > 0 && top_p <= 1)) throw ConfigError("decoding: top_p must be in (0,1]");
    if (top_k <= 0) throw ConfigError("decoding: top_k must be positive");
    if (repetition_penalty <= 0) throw ConfigError("decoding: repetition_penalty must be positive");
    if (max_tokens <= 0) throw ConfigError("decoding: max_tokens must be positive");
}

void LabeledObservation::validate() const {
    if (problem_text.empty() || answer_text.empty())
        throw ProtocolError("labeled observation with empty problem or answer text");
    if (label == answer::GradeLabel::ungradable)
        throw ProtocolError("labeled observation must be correct or wrong");
}

std::string_view to_string(Granularity g) {
    switch (g) {
        case Granularity::baseline_skills: return "baseline_skills";
        case Granularity::extremely_low: return "extremely_low";
        case Granularity::low: return "low";
        case Granularity::mid: return "mid";
        case Granularity::high: return "high";
    }
    return "low";
}

Granularity granularity_from_string(std::string_view s) {
    for (Granularity g : all_granularities())
        if (to_string(g) == s) return g;
    throw ParseError("unknown granularity: " + std::string(s));
}

std::vector<Granularity> all_granularities() {
    return {Granularity::baseline_skills, Granularity::extremely_low, Granularity::low,
            Granularity::mid, Granularity::high};
}

void Taxonomy::validate() const {
    if (concepts.empty()) throw ConfigError("taxonomy has no concepts");
    std::set<std::string> seen;
    for (const auto& c : concepts) {
        if (!seen.insert(normalize_whitespace(c)).second)
            throw ConfigError("taxonomy has duplicate concept: " + c);
    }
}

Taxonomy Taxonomy::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open taxonomy file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("taxonomy " + path + ": " + e.what());
    }
    Taxonomy t = j.get<Taxonomy>();
    t.validate();
    return t;
}

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
    if (j.contains(key) && !j.at(key).is_null()) v = j.at(key).get<T>();
    else v.reset();
}

}  // namespace

void to_json(json& j, const Problem& p) {
    j = json{{"id", p.id},
             {"statement", p.statement},
             {"origin", std::string(to_string(p.origin))}};
    put_optional(j, "subject", p.subject);
    put_optional(j, "level", p.level);
    put_optional(j, "reference_answer", p.reference_answer);
    put_optional(j, "source_hypothesis_id", p.source_hypothesis_id);
}

void from_json(const json& j, Problem& p) {
    p.id = j.at("id").get<std::string>();
    p.statement = j.at("statement").get<std::string>();
    p.origin = problem_origin_from_string(j.at("origin").get<std::string>());
    get_optional(j, "subject", p.subject);
    get_optional(j, "level", p.level);
    get_optional(j, "reference_answer", p.reference_answer);
    get_optional(j, "source_hypothesis_id", p.source_hypothesis_id);
}

void to_json(json& j, const DecodingConfig& d) {
    j = json{{"temperature", d.temperature},
             {"top_p", d.top_p},
             {"top_k", d.top_k},
             {"repetition_penalty", d.repetition_penalty},
             {"max_tokens", d.max_tokens}};
    put_optional(j, "seed", d.seed);
}

void from_json(const json& j, DecodingConfig& d) {
    d = DecodingConfig{};
    if (j.contains("temperature")) d.temperature = j.at("temperature").get<double>();
    if (j.contains("top_p")) d.top_p = j.at("top_p").get<double>();
    if (j.contains("top_k")) d.top_k = j.at("top_k").get<int>();
    if (j.contains("repetition_penalty"))
        d.repetition_penalty = j.at("repetition_penalty").get<double>();
    if (j.contains("max_tokens")) d.max_tokens = j.at("max_tokens").get<int>();
    get_optional(j, "seed", d.seed);
}

void to_json(json& j, const AttemptRecord& r) {
    j = json{{"problem_id", r.problem_id},
             {"attempt_index", r.attempt_index},
             {"raw_output", r.raw_output},
             {"label", std::string(answer::to_string(r.label))},
             {"decoding", r.decoding}};
    put_optional(j, "extracted_answer", r.extracted_answer);
    put_optional(j, "error_note", r.error_note);
}

void from_json(const json& j, AttemptRecord& r) {
    r.problem_id = j.at("problem_id").get<std::string>();
    r.attempt_index = j.at("attempt_index").get<int>();
    r.raw_output = j.at("raw_output").get<std::string>();
    r.label = answer::grade_label_from_string(j.at("label").get<std::string>());
    r.decoding = j.at("decoding").get<DecodingConfig>();
    get_optional(j, "extracted_answer", r.extracted_answer);
    get_optional(j, "error_note", r.error_note);
}

void to_json(json& j, const LabeledObservation& o) {
    j = json{{"problem_text", o.problem_text},
             {"answer_text", o.answer_text},
             {"label", std::string(answer::to_string(o.label))}};
}

void from_json(const json& j, LabeledObservation& o) {
    o.problem_text = j.at("problem_text").get<std::string>();
    o.answer_text = j.at("answer_text").get<std::string>();
    o.label = answer::grade_label_from_string(j.at("label").get<std::string>());
}

void to_json(json& j, const Taxonomy& t) {
    j = json{{"granularity", std::string(to_string(t.granularity))}, {"concepts", t.concepts}};
}

void from_json(const json& j, Taxonomy& t) {
    t.granularity = granularity_from_string(j.at("granularity").get<std::string>());
    t.concepts = j.at("concepts").get<std::vector<std::string>>();
}

}  // namespace weakbench
