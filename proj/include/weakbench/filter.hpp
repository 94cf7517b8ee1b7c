#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "weakbench/gateway.hpp"
#include "weakbench/hypogen.hpp"
#include "weakbench/types.hpp"

namespace weakbench::filter {

using hypogen::ModelRef;

/// Sink invoked once per graded attempt, in completion order; lets callers
/// journal progress so interrupted runs resume.
using AttemptSink = std::function<void(const AttemptRecord&)>;

struct AttemptRunOptions {
    int k = 5;
    DecodingConfig decoding = DecodingConfig::target_defaults();
    /// (problem_id, attempt_index) pairs already on disk; skipped and merged.
    std::vector<AttemptRecord> resume_from;
};

/// The solving prompt used for Stage-1 attempts and for evaluation runs.
gateway::CompletionRequest solve_request(const ModelRef& model, const std::string& statement,
                                         const DecodingConfig& decoding, int attempt_index);

/// Attempts every problem k times on the target model and grades each
/// attempt. Gateway failures become ungradable records with an error note;
/// nothing is dropped. Output is ordered by (problem_id, attempt_index).
std::vector<AttemptRecord> run_attempts(const std::vector<Problem>& problems,
                                        const ModelRef& model, const AttemptRunOptions& options,
                                        gateway::Gateway& gw,
                                        const AttemptSink& sink = nullptr);

/// Ids whose k labels are all wrong or ungradable, sorted ascending.
/// A problem with a different attempt count is a protocol error.
std::vector<std::string> select_consistent_failures(const std::vector<AttemptRecord>& records,
                                                    int k);

/// One observation per consistent failure (label wrong, first attempt's raw
/// output) plus a seeded sample of solved problems (label correct, a correct
/// attempt's raw output); the result is shuffled by the same seed.
std::vector<LabeledObservation> assemble_observation_dataset(
    const std::vector<Problem>& problems, const std::vector<AttemptRecord>& records,
    const std::vector<std::string>& failure_ids, int correct_sample_size, uint64_t seed);

}  // namespace weakbench::filter
