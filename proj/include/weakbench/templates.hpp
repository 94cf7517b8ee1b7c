#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "weakbench/types.hpp"

namespace weakbench::hypogen {

struct PromptTemplate {
    std::string text;

    /// Placeholder names appearing as ${name}, deduplicated.
    std::set<std::string> placeholders() const;
};

/// The five-section prompt bundle one granularity ships with. Each section's
/// placeholder set is validated exactly on load; anything else is a config
/// defect worth failing early on.
struct PromptTemplateSet {
    Granularity granularity = Granularity::low;
    PromptTemplate observations;
    PromptTemplate batched_generation_system;
    PromptTemplate batched_generation_user;
    PromptTemplate inference_system;
    PromptTemplate inference_user;
    PromptTemplate multi_inference_system;
    PromptTemplate multi_inference_user;

    void validate() const;
};

/// Loads and validates a template asset. Granularity comes from the file
/// stem (baseline_skills / extremely_low / low / mid / high).
PromptTemplateSet load_template_set(const std::string& path);

/// Replaces each ${name} with its binding verbatim; inserted text is never
/// re-expanded. Bindings must cover the placeholder set exactly.
std::string render_template(const PromptTemplate& tmpl,
                            const std::map<std::string, std::string>& bindings);

/// One rendered observations block per observation, concatenated in order
/// with a separating newline.
std::string render_observations(const PromptTemplate& observations_template,
                                const std::vector<LabeledObservation>& observations);

}  // namespace weakbench::hypogen
