#include "weakbench/forge.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "weakbench/answer.hpp"
#include "weakbench/digest.hpp"
#include "weakbench/error.hpp"
#include "weakbench/store.hpp"

namespace weakbench::forge {

using nlohmann::json;

std::string_view to_string(ScreenStatus s) {
    switch (s) {
        case ScreenStatus::pending: return "pending";
        case ScreenStatus::kept: return "kept";
        case ScreenStatus::rejected: return "rejected";
    }
    return "pending";
}

ScreenStatus screen_status_from_string(std::string_view s) {
    if (s == "pending") return ScreenStatus::pending;
    if (s == "kept") return ScreenStatus::kept;
    if (s == "rejected") return ScreenStatus::rejected;
    throw ParseError("unknown screen status: " + std::string(s));
}

std::string_view to_string(RejectReason r) {
    switch (r) {
        case RejectReason::invalid: return "invalid";
        case RejectReason::incorrect: return "incorrect";
        case RejectReason::incomplete: return "incomplete";
        case RejectReason::ambiguous: return "ambiguous";
        case RejectReason::proof_style: return "proof_style";
        case RejectReason::format: return "format";
    }
    return "invalid";
}

RejectReason reject_reason_from_string(std::string_view s) {
    for (RejectReason r : {RejectReason::invalid, RejectReason::incorrect,
                           RejectReason::incomplete, RejectReason::ambiguous,
                           RejectReason::proof_style, RejectReason::format})
        if (to_string(r) == s) return r;
    throw ParseError("unknown reject reason: " + std::string(s));
}

std::string_view to_string(Agreement a) {
    switch (a) {
        case Agreement::unanimous: return "unanimous";
        case Agreement::majority: return "majority";
        case Agreement::none: return "none";
    }
    return "none";
}

Agreement agreement_from_string(std::string_view s) {
    for (Agreement a : {Agreement::unanimous, Agreement::majority, Agreement::none})
        if (to_string(a) == s) return a;
    throw ParseError("unknown agreement: " + std::string(s));
}

std::string_view to_string(Validation v) {
    switch (v) {
        case Validation::auto_accepted: return "auto_accepted";
        case Validation::pending_review: return "pending_review";
        case Validation::human_accepted: return "human_accepted";
        case Validation::human_overridden: return "human_overridden";
        case Validation::rejected: return "rejected";
    }
    return "pending_review";
}

Validation validation_from_string(std::string_view s) {
    for (Validation v : {Validation::auto_accepted, Validation::pending_review,
                         Validation::human_accepted, Validation::human_overridden,
                         Validation::rejected})
        if (to_string(v) == s) return v;
    throw ParseError("unknown validation: " + std::string(s));
}

void AnswerKey::validate() const {
    const bool accepted = validation == Validation::auto_accepted ||
                          validation == Validation::human_accepted ||
                          validation == Validation::human_overridden;
    if (accepted != final_answer.has_value())
        throw ProtocolError("answer key " + problem_id +
                            ": final_answer must be present exactly when accepted");
}

void to_json(json& j, const GeneratedProblem& p) {
    j = json{{"problem", p.problem}, {"status", std::string(to_string(p.status))}};
    if (p.reason) j["reason"] = std::string(to_string(*p.reason));
}

void from_json(const json& j, GeneratedProblem& p) {
    p.problem = j.at("problem").get<Problem>();
    p.status = screen_status_from_string(j.at("status").get<std::string>());
    if (j.contains("reason")) p.reason = reject_reason_from_string(j.at("reason").get<std::string>());
    else p.reason.reset();
}

void to_json(json& j, const AnswerKey& k) {
    json candidates = json::array();
    for (const auto& c : k.candidates)
        candidates.push_back(json{{"solver", c.solver}, {"extracted", c.extracted}});
    j = json{{"problem_id", k.problem_id},
             {"candidates", candidates},
             {"agreement", std::string(to_string(k.agreement))},
             {"validation", std::string(to_string(k.validation))},
             {"dissent_note", k.dissent_note},
             {"review_note", k.review_note},
             {"reviewed_at", k.reviewed_at}};
    if (k.final_answer) j["final_answer"] = *k.final_answer;
    if (k.suggested_answer) j["suggested_answer"] = *k.suggested_answer;
}

void from_json(const json& j, AnswerKey& k) {
    k = AnswerKey{};
    k.problem_id = j.at("problem_id").get<std::string>();
    for (const auto& c : j.at("candidates"))
        k.candidates.push_back({c.at("solver").get<std::string>(),
                                c.at("extracted").get<std::string>()});
    k.agreement = agreement_from_string(j.at("agreement").get<std::string>());
    k.validation = validation_from_string(j.at("validation").get<std::string>());
    k.dissent_note = j.value("dissent_note", "");
    k.review_note = j.value("review_note", "");
    k.reviewed_at = j.value("reviewed_at", "");
    if (j.contains("final_answer")) k.final_answer = j.at("final_answer").get<std::string>();
    if (j.contains("suggested_answer"))
        k.suggested_answer = j.at("suggested_answer").get<std::string>();
}

GenerationTemplate load_generation_template(const std::string& path) {
    GenerationTemplate tmpl{read_file(path)};
    if (tmpl.text.find("<one Hypothesis>") == std::string::npos)
        throw ParseError("generation template missing <one Hypothesis> slot: " + path);
    if (tmpl.text.find("{n}") == std::string::npos)
        throw ParseError("generation template missing {n} slot: " + path);
    return tmpl;
}

namespace {

void replace_all(std::string& text, std::string_view from, std::string_view to) {
    size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
}

}  // namespace

std::string render_generation_prompt(const GenerationTemplate& tmpl,
                                     const hypogen::Hypothesis& hypothesis, int n,
                                     const Taxonomy& taxonomy) {
    if (n < 1) throw ConfigError("render_generation_prompt: n must be >= 1");
    taxonomy.validate();
    std::string prompt = tmpl.text;
    replace_all(prompt, "<one Hypothesis>", hypothesis.text);
    replace_all(prompt, "{n}", std::to_string(n));
    prompt += "\nThe math concepts and skills present in the benchmark:\n";
    for (const auto& concept_name : taxonomy.concepts) prompt += "- " + concept_name + "\n";
    return prompt;
}

std::vector<std::string> parse_problem_list(const std::string& text, int expected_n) {
    if (expected_n < 1) throw ConfigError("parse_problem_list: expected_n must be >= 1");

    auto find_header = [&](int k, size_t from) -> std::pair<size_t, size_t> {
        const std::string header = "Problem " + std::to_string(k) + ":";
        size_t pos = from;
        while (pos < text.size()) {
            pos = text.find(header, pos);
            if (pos == std::string::npos) break;
            bool at_line_start = pos == 0 || text[pos - 1] == '\n';
            if (at_line_start) return {pos, pos + header.size()};
            ++pos;
        }
        return {std::string::npos, std::string::npos};
    };

    std::vector<std::pair<size_t, size_t>> headers;
    size_t cursor = 0;
    for (int k = 1;; ++k) {
        auto [start, content] = find_header(k, cursor);
        if (start == std::string::npos) break;
        headers.emplace_back(start, content);
        cursor = content;
    }
    if (static_cast<int>(headers.size()) != expected_n)
        throw ParseError("problem list: expected " + std::to_string(expected_n) +
                         " problems, found " + std::to_string(headers.size()));

    auto trim = [](std::string s) {
        size_t b = s.find_first_not_of(" \t\r\n");
        size_t e = s.find_last_not_of(" \t\r\n");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };

    std::vector<std::string> statements;
    for (size_t i = 0; i < headers.size(); ++i) {
        size_t begin = headers[i].second;
        size_t end = i + 1 < headers.size() ? headers[i + 1].first : text.size();
        std::string body = trim(text.substr(begin, end - begin));
        if (body.empty())
            throw ParseError("problem list: problem " + std::to_string(i + 1) + " is empty");
        statements.push_back(std::move(body));
    }
    return statements;
}

std::string render_quoted_list(const std::vector<std::string>& statements) {
    std::string out;
    for (size_t i = 0; i < statements.size(); ++i) {
        out += json(statements[i]).dump();
        if (i + 1 < statements.size()) out += ",";
        out += "\n";
    }
    return out;
}

std::vector<std::string> parse_quoted_list(const std::string& text) {
    std::vector<std::string> statements;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = line.find_last_not_of(" \t\r");
        std::string body = line.substr(b, e - b + 1);
        if (body.back() == ',') body.pop_back();
        try {
            statements.push_back(json::parse(body).get<std::string>());
        } catch (const json::exception& e2) {
            throw ParseError("problem list line " + std::to_string(lineno) + ": " + e2.what());
        }
    }
    return statements;
}

namespace {

bool has_proof_wording(const std::string& statement) {
    std::string lowered = statement;
    for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto word_at = [&](std::string_view phrase, size_t pos) {
        bool before_ok = pos == 0 || !std::isalpha(static_cast<unsigned char>(lowered[pos - 1]));
        size_t end = pos + phrase.size();
        bool after_ok =
            end >= lowered.size() || !std::isalpha(static_cast<unsigned char>(lowered[end]));
        return before_ok && after_ok;
    };
    for (std::string_view phrase : {std::string_view("prove"), std::string_view("show that"),
                                    std::string_view("explain why")}) {
        size_t pos = 0;
        while ((pos = lowered.find(phrase, pos)) != std::string::npos) {
            if (word_at(phrase, pos)) return true;
            ++pos;
        }
    }
    return false;
}

std::optional<std::string> parse_verdict(const std::string& completion) {
    static const std::set<std::string> verdicts = {"valid", "invalid", "incorrect", "incomplete",
                                                   "ambiguous"};
    std::string lowered = completion;
    for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    // Last verdict word wins, so "the problem is valid" parses cleanly.
    std::optional<std::string> found;
    size_t i = 0;
    while (i < lowered.size()) {
        while (i < lowered.size() && !std::isalpha(static_cast<unsigned char>(lowered[i]))) ++i;
        size_t begin = i;
        while (i < lowered.size() && std::isalpha(static_cast<unsigned char>(lowered[i]))) ++i;
        std::string word = lowered.substr(begin, i - begin);
        if (verdicts.count(word)) found = word;
    }
    return found;
}

}  // namespace

gateway::CompletionRequest solver_request(const ModelRef& solver, const std::string& statement,
                                          const DecodingConfig& decoding) {
    gateway::CompletionRequest request;
    request.provider_id = solver.provider_id;
    request.model_name = solver.model_name;
    request.system_prompt = "You are an expert competition mathematician.";
    request.user_prompt = "Give only the final answer in \\boxed{}.\n\nProblem: " + statement;
    request.decoding = decoding;
    return request;
}

gateway::CompletionRequest judge_request(const ModelRef& judge, const std::string& statement,
                                         const DecodingConfig& decoding) {
    gateway::CompletionRequest request;
    request.provider_id = judge.provider_id;
    request.model_name = judge.model_name;
    request.system_prompt = "You review machine-generated math problems for use in a benchmark.";
    request.user_prompt =
        "Classify the following problem with exactly one word: valid, invalid, incorrect, "
        "incomplete, or ambiguous. A valid problem is clear, solvable, and has a specific "
        "answer.\n\nProblem statement:\n" +
        statement + "\n\nVerdict:";
    request.decoding = decoding;
    return request;
}

std::vector<GeneratedProblem> screen_problems(const std::vector<std::string>& statements,
                                              const std::string& hypothesis_id,
                                              const ModelRef& judge, gateway::Gateway& gw,
                                              const ScreenRules& rules) {
    std::vector<GeneratedProblem> out;
    std::set<std::string> seen_digests;

    for (const auto& statement : statements) {
        GeneratedProblem gp;
        std::string trimmed = normalize_whitespace(statement);
        if (trimmed.empty()) {
            gp.problem = Problem{};
            gp.problem.statement = statement;
            gp.problem.origin = ProblemOrigin::generated;
            gp.problem.source_hypothesis_id = hypothesis_id;
            gp.status = ScreenStatus::rejected;
            gp.reason = RejectReason::format;
            out.push_back(std::move(gp));
            continue;
        }
        gp.problem = Problem::from_statement(statement, ProblemOrigin::generated);
        gp.problem.source_hypothesis_id = hypothesis_id;
        if (!seen_digests.insert(gp.problem.id).second) {
            gp.status = ScreenStatus::rejected;
            gp.reason = RejectReason::format;
        } else if (has_proof_wording(statement)) {
            gp.status = ScreenStatus::rejected;
            gp.reason = RejectReason::proof_style;
        }
        out.push_back(std::move(gp));
    }

    // Judge pass over rule-pass survivors.
    for (auto& gp : out) {
        if (gp.status == ScreenStatus::rejected) continue;
        auto request = judge_request(judge, gp.problem.statement, rules.judge_decoding);

        std::optional<std::string> verdict;
        for (int retry = 0; retry <= rules.judge_retry_budget && !verdict; ++retry) {
            auto attempt = request;
            if (retry > 0)
                attempt.decoding.seed = rules.judge_decoding.seed.value_or(0) + retry;
            verdict = parse_verdict(gw.complete(attempt).text);
        }
        if (!verdict) {
            gp.status = ScreenStatus::pending;  // unresolved, goes to review
            continue;
        }
        if (*verdict == "valid") {
            gp.status = ScreenStatus::kept;
        } else {
            gp.status = ScreenStatus::rejected;
            gp.reason = reject_reason_from_string(*verdict);
        }
    }
    return out;
}

std::pair<Agreement, int> classify_agreement(const std::vector<SolverCandidate>& candidates) {
    if (candidates.empty()) return {Agreement::none, -1};
    std::vector<answer::CanonicalAnswer> normalized;
    normalized.reserve(candidates.size());
    for (const auto& c : candidates) normalized.push_back(answer::normalize(c.extracted));

    // Partition into equivalence classes, keeping first-seen order.
    std::vector<int> class_of(candidates.size(), -1);
    std::vector<int> class_size;
    std::vector<int> class_first;
    for (size_t i = 0; i < candidates.size(); ++i) {
        for (size_t c = 0; c < class_first.size(); ++c) {
            if (answer::equivalent(normalized[i], normalized[class_first[c]])) {
                class_of[i] = static_cast<int>(c);
                ++class_size[c];
                break;
            }
        }
        if (class_of[i] < 0) {
            class_of[i] = static_cast<int>(class_first.size());
            class_first.push_back(static_cast<int>(i));
            class_size.push_back(1);
        }
    }
    if (class_first.size() == 1) return {Agreement::unanimous, 0};
    const int n = static_cast<int>(candidates.size());
    for (size_t c = 0; c < class_first.size(); ++c) {
        if (class_size[c] * 2 > n) return {Agreement::majority, class_first[c]};
    }
    return {Agreement::none, -1};
}

AnswerKey derive_answer_key(const GeneratedProblem& problem, const std::vector<ModelRef>& solvers,
                            gateway::Gateway& gw, const KeyRules& rules) {
    if (problem.status != ScreenStatus::kept)
        throw ProtocolError("derive_answer_key: problem not kept: " + problem.problem.id);
    if (solvers.size() < 2) throw ConfigError("derive_answer_key: need at least 2 solvers");

    std::vector<gateway::CompletionRequest> requests;
    for (const auto& solver : solvers)
        requests.push_back(solver_request(solver, problem.problem.statement, rules.solver_decoding));
    auto results = gw.complete_batch(requests, gw.provider().config().parallelism);

    AnswerKey key;
    key.problem_id = problem.problem.id;
    for (size_t i = 0; i < solvers.size(); ++i) {
        if (!results[i].ok) continue;  // solver failure just shrinks the candidate set
        auto extracted = answer::try_extract_final_answer(results[i].response.text);
        if (!extracted) continue;
        key.candidates.push_back({solvers[i].model_name, *extracted});
    }

    if (key.candidates.size() < 2) {
        key.agreement = Agreement::none;
        key.validation = Validation::pending_review;
        return key;
    }

    auto [agreement, winner] = classify_agreement(key.candidates);
    key.agreement = agreement;
    if (agreement == Agreement::none) {
        key.validation = Validation::pending_review;
        return key;
    }

    const std::string& answer_text = key.candidates[winner].extracted;
    if (agreement == Agreement::majority) {
        std::string dissent;
        auto winner_form = answer::normalize(answer_text);
        for (const auto& c : key.candidates) {
            if (!answer::equivalent(answer::normalize(c.extracted), winner_form)) {
                if (!dissent.empty()) dissent += "; ";
                dissent += c.solver + " answered " + c.extracted;
            }
        }
        key.dissent_note = dissent;
    }

    auto canonical = answer::normalize(answer_text);
    if (canonical.kind == answer::AnswerKind::symbolic_text &&
        canonical.text.size() > rules.max_symbolic_answer_len) {
        // Long symbolic answers stay outside the grader's comfort zone.
        key.validation = Validation::pending_review;
        key.suggested_answer = answer_text;
        return key;
    }

    key.validation = Validation::auto_accepted;
    key.final_answer = answer_text;
    key.suggested_answer = answer_text;
    key.validate();
    return key;
}

AnswerKey resolve_review(const AnswerKey& key, const ReviewDecision& decision,
                         const std::string& timestamp) {
    if (key.validation != Validation::pending_review)
        throw ReviewError("review decision on non-pending key " + key.problem_id + " (state " +
                          std::string(to_string(key.validation)) + ")");
    AnswerKey resolved = key;
    resolved.review_note = decision.note;
    resolved.reviewed_at = timestamp;
    switch (decision.kind) {
        case ReviewDecision::Kind::accept:
            if (!key.suggested_answer)
                throw ReviewError("cannot accept key " + key.problem_id +
                                  ": no agreed candidate; override or reject");
            resolved.validation = Validation::human_accepted;
            resolved.final_answer = key.suggested_answer;
            break;
        case ReviewDecision::Kind::override_answer:
            if (decision.answer.empty())
                throw ReviewError("override requires a non-empty answer");
            resolved.validation = Validation::human_overridden;
            resolved.final_answer = decision.answer;
            break;
        case ReviewDecision::Kind::reject:
            resolved.validation = Validation::rejected;
            resolved.final_answer.reset();
            break;
    }
    resolved.validate();
    return resolved;
}

}  // namespace weakbench::forge
