#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "weakbench/gateway.hpp"
#include "weakbench/templates.hpp"
#include "weakbench/types.hpp"

namespace weakbench::hypogen {

/// Shortest round-trip decimal rendering ("0.77", "0.8226950354609929");
/// integral values keep a trailing ".0".
std::string render_accuracy(double value);

/// Natural-language weakness statement with its measured label-prediction
/// accuracy, kept as the exact fraction matches/total.
struct Hypothesis {
    std::string id;
    std::string text;
    Granularity granularity = Granularity::low;
    int matches = 0;
    int total = 0;
    std::vector<std::string> predictions;  // "correct" / "wrong" / "error" per observation
    std::string model_name;
    int batch_index = 0;

    double accuracy() const { return total > 0 ? double(matches) / double(total) : parsed_accuracy; }
    std::string accuracy_decimal() const { return render_accuracy(accuracy()); }

    static Hypothesis make(std::string text, Granularity granularity);

    // Accuracy carried by a parsed bank line, when the fraction is unknown.
    double parsed_accuracy = 0.0;
};

void to_json(nlohmann::json& j, const Hypothesis& h);
void from_json(const nlohmann::json& j, Hypothesis& h);

/// `Hypothesis N: "<text>" (accuracy: <decimal>)`
std::string render_bank_line(int index, const Hypothesis& h);
Hypothesis parse_bank_line(const std::string& line, Granularity granularity);

/// Top-K bank ordered by (accuracy desc, text asc); deduplicates by
/// casefolded, whitespace-collapsed text.
class HypothesisBank {
public:
    static constexpr int kDefaultCapacity = 15;

    explicit HypothesisBank(int capacity = kDefaultCapacity);

    void insert(Hypothesis h);
    bool contains(const std::string& text) const;
    const std::vector<Hypothesis>& entries() const { return entries_; }
    int capacity() const { return capacity_; }

    std::vector<std::string> render_lines() const;
    nlohmann::json to_json_payload() const;
    static HypothesisBank from_json_payload(const nlohmann::json& payload);

private:
    int capacity_;
    std::vector<Hypothesis> entries_;
};

/// True when a orders strictly before b under (accuracy desc, text asc).
/// Exact fractions compare by cross-multiplication.
bool bank_orders_before(const Hypothesis& a, const Hypothesis& b);

/// Extracts expected_n items marked "1." .. "n." (bracketed or bare, inline
/// or one per line). A count mismatch reports how many were found so the
/// caller can retry the completion.
std::vector<std::string> parse_numbered_list(const std::string& text, int expected_n);

struct HypogenConfig {
    int num_batches = 5;
    int batch_size = 20;
    int proposals_per_batch = 10;
    int bank_capacity = HypothesisBank::kDefaultCapacity;
    uint64_t seed = 0;
    int parse_retry_budget = 2;
    DecodingConfig decoding;          // hypothesis-model decoding
    std::string inference_mode = "single";  // "single" | "multiple"
};

struct ModelRef {
    std::string provider_id;
    std::string model_name;
};

std::vector<std::string> propose_hypotheses(const std::vector<LabeledObservation>& batch, int n,
                                            const PromptTemplateSet& templates,
                                            const ModelRef& model, gateway::Gateway& gw,
                                            const DecodingConfig& decoding,
                                            int parse_retry_budget);

/// Parses the last "Final answer:" in the completion to correct/wrong.
answer::GradeLabel parse_prediction(const std::string& completion);

answer::GradeLabel predict_label(const std::string& hypothesis_text,
                                 const LabeledObservation& observation,
                                 const PromptTemplateSet& templates, const ModelRef& model,
                                 gateway::Gateway& gw, const DecodingConfig& decoding);

/// Same inference against a joint list of hypotheses (alternative mode; the
/// default scoring loop does not use it).
answer::GradeLabel predict_label_multi(const std::vector<std::string>& hypothesis_texts,
                                       const LabeledObservation& observation,
                                       const PromptTemplateSet& templates, const ModelRef& model,
                                       gateway::Gateway& gw, const DecodingConfig& decoding);

/// One prediction per observation; accuracy = exact match fraction.
/// Unparseable predictions count as mismatches so every hypothesis shares
/// the same denominator.
Hypothesis score_hypothesis(const std::string& hypothesis_text,
                            const std::vector<LabeledObservation>& dataset,
                            const PromptTemplateSet& templates, const ModelRef& model,
                            gateway::Gateway& gw, const DecodingConfig& decoding,
                            int batch_index = 0);

/// Propose / dedupe / score / rank over seeded observation batches.
/// On error the checkpoint callback receives the bank built so far before
/// the error surfaces.
HypothesisBank run_generation_loop(
    const std::vector<LabeledObservation>& dataset, const HypogenConfig& config,
    const PromptTemplateSet& templates, const ModelRef& model, gateway::Gateway& gw,
    const std::function<void(const HypothesisBank&)>& checkpoint = nullptr);

}  // namespace weakbench::hypogen
