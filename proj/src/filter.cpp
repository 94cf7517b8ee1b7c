#include "weakbench/filter.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "weakbench/answer.hpp"
#include "weakbench/error.hpp"
#include "weakbench/rng.hpp"

namespace weakbench::filter {

gateway::CompletionRequest solve_request(const ModelRef& model, const std::string& statement,
                                         const DecodingConfig& decoding, int attempt_index) {
    gateway::CompletionRequest request;
    request.provider_id = model.provider_id;
    request.model_name = model.model_name;
    request.system_prompt =
        "You are a careful mathematician. Work through the problem and give a final answer.";
    request.user_prompt =
        "Solve the following math problem step by step. Put your final answer in \\boxed{}.\n\n" +
        statement;
    request.decoding = decoding;
    // Distinct seeds keep the k attempts independent and the run replayable.
    request.decoding.seed = decoding.seed.value_or(0) * 1000 + attempt_index;
    return request;
}

std::vector<AttemptRecord> run_attempts(const std::vector<Problem>& problems,
                                        const ModelRef& model, const AttemptRunOptions& options,
                                        gateway::Gateway& gw, const AttemptSink& sink) {
    if (options.k < 1) throw ConfigError("run_attempts: k must be >= 1");
    for (const auto& p : problems) {
        if (!p.reference_answer)
            throw ProtocolError("run_attempts: problem lacks reference answer: " + p.id);
    }

    std::set<std::pair<std::string, int>> done;
    for (const auto& r : options.resume_from) done.insert({r.problem_id, r.attempt_index});

    struct Slot {
        const Problem* problem;
        int attempt_index;
    };
    std::vector<Slot> slots;
    std::vector<gateway::CompletionRequest> requests;
    for (const auto& p : problems) {
        for (int a = 0; a < options.k; ++a) {
            if (done.count({p.id, a})) continue;
            slots.push_back({&p, a});
            requests.push_back(solve_request(model, p.statement, options.decoding, a));
        }
    }

    auto results = gw.complete_batch(requests, gw.provider().config().parallelism);

    std::vector<AttemptRecord> records = options.resume_from;
    records.reserve(records.size() + slots.size());
    for (size_t i = 0; i < slots.size(); ++i) {
        AttemptRecord record;
        record.problem_id = slots[i].problem->id;
        record.attempt_index = slots[i].attempt_index;
        record.decoding = requests[i].decoding;
        if (results[i].ok) {
            record.raw_output = results[i].response.text;
            record.extracted_answer = answer::try_extract_final_answer(record.raw_output);
            record.label =
                answer::grade_attempt(record.raw_output, *slots[i].problem->reference_answer);
        } else {
            record.raw_output = "";
            record.label = answer::GradeLabel::ungradable;
            record.error_note = results[i].error;
        }
        if (sink) sink(record);
        records.push_back(std::move(record));
    }

    std::sort(records.begin(), records.end(), [](const AttemptRecord& a, const AttemptRecord& b) {
        return std::tie(a.problem_id, a.attempt_index) < std::tie(b.problem_id, b.attempt_index);
    });
    return records;
}

std::vector<std::string> select_consistent_failures(const std::vector<AttemptRecord>& records,
                                                    int k) {
    if (k < 1) throw ConfigError("select_consistent_failures: k must be >= 1");
    std::map<std::string, std::pair<int, bool>> by_problem;  // id -> (count, any_correct)
    for (const auto& r : records) {
        auto& [count, any_correct] = by_problem[r.problem_id];
        ++count;
        if (r.label == answer::GradeLabel::correct) any_correct = true;
    }
    std::vector<std::string> failures;
    for (const auto& [id, state] : by_problem) {
        if (state.first != k)
            throw ProtocolError("problem " + id + " has " + std::to_string(state.first) +
                                " attempts, expected " + std::to_string(k));
        if (!state.second) failures.push_back(id);
    }
    return failures;  // std::map iteration is already id-ascending
}

std::vector<LabeledObservation> assemble_observation_dataset(
    const std::vector<Problem>& problems, const std::vector<AttemptRecord>& records,
    const std::vector<std::string>& failure_ids, int correct_sample_size, uint64_t seed) {
    if (correct_sample_size < 0)
        throw ConfigError("assemble_observation_dataset: negative sample size");

    std::map<std::string, const Problem*> problem_by_id;
    for (const auto& p : problems) problem_by_id[p.id] = &p;

    // First attempt per failed problem; first correct attempt per solved problem.
    std::map<std::string, const AttemptRecord*> first_attempt;
    std::map<std::string, const AttemptRecord*> first_correct;
    for (const auto& r : records) {
        auto [it, inserted] = first_attempt.try_emplace(r.problem_id, &r);
        if (!inserted && r.attempt_index < it->second->attempt_index) it->second = &r;
        if (r.label == answer::GradeLabel::correct) {
            auto [cit, cinserted] = first_correct.try_emplace(r.problem_id, &r);
            if (!cinserted && r.attempt_index < cit->second->attempt_index) cit->second = &r;
        }
    }

    std::vector<LabeledObservation> dataset;
    std::set<std::string> failure_set(failure_ids.begin(), failure_ids.end());
    for (const auto& id : failure_ids) {
        auto pit = problem_by_id.find(id);
        auto ait = first_attempt.find(id);
        if (pit == problem_by_id.end() || ait == first_attempt.end())
            throw ProtocolError("failure id without problem or attempts: " + id);
        LabeledObservation obs;
        obs.problem_text = pit->second->statement;
        obs.answer_text =
            ait->second->raw_output.empty() ? "(no output)" : ait->second->raw_output;
        obs.label = answer::GradeLabel::wrong;
        dataset.push_back(std::move(obs));
    }

    std::vector<std::string> solved_ids;
    for (const auto& [id, rec] : first_correct) {
        if (!failure_set.count(id)) solved_ids.push_back(id);
    }
    if (correct_sample_size > static_cast<int>(solved_ids.size()))
        throw ProtocolError("requested " + std::to_string(correct_sample_size) +
                            " correct-labeled samples but only " +
                            std::to_string(solved_ids.size()) + " problems were solved");

    SeededRng rng(seed);
    auto sample = rng.sample_indices(solved_ids.size(), correct_sample_size);
    std::sort(sample.begin(), sample.end());
    for (size_t idx : sample) {
        const std::string& id = solved_ids[idx];
        LabeledObservation obs;
        obs.problem_text = problem_by_id.at(id)->statement;
        obs.answer_text = first_correct.at(id)->raw_output;
        obs.label = answer::GradeLabel::correct;
        dataset.push_back(std::move(obs));
    }

    rng.shuffle(dataset);
    return dataset;
}

}  // namespace weakbench::filter
