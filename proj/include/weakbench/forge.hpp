#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "weakbench/gateway.hpp"
#include "weakbench/hypogen.hpp"
#include "weakbench/types.hpp"

namespace weakbench::forge {

using hypogen::ModelRef;

enum class ScreenStatus { pending, kept, rejected };
enum class RejectReason { invalid, incorrect, incomplete, ambiguous, proof_style, format };

std::string_view to_string(ScreenStatus s);
ScreenStatus screen_status_from_string(std::string_view s);
std::string_view to_string(RejectReason r);
RejectReason reject_reason_from_string(std::string_view s);

struct GeneratedProblem {
    Problem problem;  // origin = generated, source_hypothesis_id set
    ScreenStatus status = ScreenStatus::pending;
    std::optional<RejectReason> reason;  // present iff rejected
};

void to_json(nlohmann::json& j, const GeneratedProblem& p);
void from_json(const nlohmann::json& j, GeneratedProblem& p);

enum class Agreement { unanimous, majority, none };
enum class Validation { auto_accepted, pending_review, human_accepted, human_overridden, rejected };

std::string_view to_string(Agreement a);
Agreement agreement_from_string(std::string_view s);
std::string_view to_string(Validation v);
Validation validation_from_string(std::string_view s);

struct SolverCandidate {
    std::string solver;     // model name
    std::string extracted;  // extracted answer text
};

struct AnswerKey {
    std::string problem_id;
    std::vector<SolverCandidate> candidates;
    Agreement agreement = Agreement::none;
    std::optional<std::string> final_answer;
    Validation validation = Validation::pending_review;
    std::optional<std::string> suggested_answer;  // winning candidate awaiting review
    std::string dissent_note;
    std::string review_note;
    std::string reviewed_at;

    void validate() const;
};

void to_json(nlohmann::json& j, const AnswerKey& k);
void from_json(const nlohmann::json& j, AnswerKey& k);

struct GenerationTemplate {
    std::string text;  // carries the <one Hypothesis> and {n} slots
};

GenerationTemplate load_generation_template(const std::string& path);

/// Instantiates the generation template with the hypothesis, the requested
/// problem count, and the taxonomy's concept list appended as context.
std::string render_generation_prompt(const GenerationTemplate& tmpl,
                                     const hypogen::Hypothesis& hypothesis, int n,
                                     const Taxonomy& taxonomy);

/// Splits completion text on ascending "Problem N:" headers; bodies keep
/// their internal newlines. A header-count mismatch is a retriable error.
std::vector<std::string> parse_problem_list(const std::string& text, int expected_n);

/// One quoted, escaped statement per line; every line but the last ends
/// with a comma. Inverse of parse_quoted_list.
std::string render_quoted_list(const std::vector<std::string>& statements);
std::vector<std::string> parse_quoted_list(const std::string& text);

/// Request a solver answers a generated problem with.
gateway::CompletionRequest solver_request(const ModelRef& solver, const std::string& statement,
                                          const DecodingConfig& decoding);

/// Request the screening judge classifies a generated problem with.
gateway::CompletionRequest judge_request(const ModelRef& judge, const std::string& statement,
                                         const DecodingConfig& decoding);

struct ScreenRules {
    int judge_retry_budget = 2;
    DecodingConfig judge_decoding;
};

/// Rule pass (proof-style wording, empty or duplicate statements) then an
/// LLM judge pass with one-word verdicts. Judge parse failures leave the
/// problem pending, never silently kept.
std::vector<GeneratedProblem> screen_problems(const std::vector<std::string>& statements,
                                              const std::string& hypothesis_id,
                                              const ModelRef& judge, gateway::Gateway& gw,
                                              const ScreenRules& rules);

struct KeyRules {
    DecodingConfig solver_decoding;
    /// Unanimous symbolic answers longer than this go to human review.
    size_t max_symbolic_answer_len = 24;
};

/// Cross-model agreement over the candidates' answer-equivalence classes:
/// unanimous or strict-majority auto-accepts, anything else queues for
/// human review. Fewer than two usable candidates always queues.
AnswerKey derive_answer_key(const GeneratedProblem& problem, const std::vector<ModelRef>& solvers,
                            gateway::Gateway& gw, const KeyRules& rules);

/// Pure agreement classification, exposed for oracle testing. Returns the
/// agreement plus the index of the first candidate in the winning class
/// (-1 when agreement is none).
std::pair<Agreement, int> classify_agreement(const std::vector<SolverCandidate>& candidates);

struct ReviewDecision {
    enum class Kind { accept, override_answer, reject };
    Kind kind = Kind::accept;
    std::string answer;  // override only
    std::string note;
};

/// Transitions a pending key to its terminal state; irreversible.
AnswerKey resolve_review(const AnswerKey& key, const ReviewDecision& decision,
                         const std::string& timestamp);

}  // namespace weakbench::forge
