#include "weakbench/hypogen.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include <nlohmann/json.hpp>

#include "weakbench/digest.hpp"
#include "weakbench/error.hpp"
#include "weakbench/rng.hpp"

namespace weakbench::hypogen {

using nlohmann::json;

std::string render_accuracy(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    std::string s(buf, ptr);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find('n') == std::string::npos)
        s += ".0";
    return s;
}

Hypothesis Hypothesis::make(std::string text, Granularity granularity) {
    Hypothesis h;
    if (text.empty()) throw ProtocolError("hypothesis with empty text");
    h.id = sha256_hex(std::string(to_string(granularity)) + "\n" + dedupe_key(text)).substr(0, 16);
    h.text = std::move(text);
    h.granularity = granularity;
    return h;
}

void to_json(json& j, const Hypothesis& h) {
    j = json{{"id", h.id},
             {"text", h.text},
             {"granularity", std::string(to_string(h.granularity))},
             {"matches", h.matches},
             {"total", h.total},
             {"predictions", h.predictions},
             {"model_name", h.model_name},
             {"batch_index", h.batch_index},
             {"accuracy", h.accuracy_decimal()}};
}

void from_json(const json& j, Hypothesis& h) {
    h.id = j.at("id").get<std::string>();
    h.text = j.at("text").get<std::string>();
    h.granularity = granularity_from_string(j.at("granularity").get<std::string>());
    h.matches = j.at("matches").get<int>();
    h.total = j.at("total").get<int>();
    h.predictions = j.at("predictions").get<std::vector<std::string>>();
    h.model_name = j.at("model_name").get<std::string>();
    h.batch_index = j.at("batch_index").get<int>();
    if (h.total == 0 && j.contains("accuracy"))
        h.parsed_accuracy = std::stod(j.at("accuracy").get<std::string>());
}

std::string render_bank_line(int index, const Hypothesis& h) {
    return "Hypothesis " + std::to_string(index) + ": \"" + h.text +
           "\" (accuracy: " + h.accuracy_decimal() + ")";
}

Hypothesis parse_bank_line(const std::string& line, Granularity granularity) {
    static const std::string prefix = "Hypothesis ";
    if (line.rfind(prefix, 0) != 0) throw ParseError("bank line: missing 'Hypothesis' prefix");
    size_t colon = line.find(':', prefix.size());
    if (colon == std::string::npos) throw ParseError("bank line: missing ':'");
    int index = 0;
    auto [p, ec] = std::from_chars(line.data() + prefix.size(), line.data() + colon, index);
    if (ec != std::errc() || p != line.data() + colon)
        throw ParseError("bank line: bad index");
    size_t open_quote = line.find('"', colon);
    static const std::string tail_marker = "\" (accuracy: ";
    size_t tail = line.rfind(tail_marker);
    if (open_quote == std::string::npos || tail == std::string::npos || tail <= open_quote)
        throw ParseError("bank line: malformed quote/accuracy section");
    if (line.back() != ')') throw ParseError("bank line: missing closing ')'");
    std::string text = line.substr(open_quote + 1, tail - open_quote - 1);
    std::string decimal = line.substr(tail + tail_marker.size(),
                                      line.size() - 1 - (tail + tail_marker.size()));
    Hypothesis h = Hypothesis::make(text, granularity);
    try {
        h.parsed_accuracy = std::stod(decimal);
    } catch (const std::exception&) {
        throw ParseError("bank line: bad accuracy decimal: " + decimal);
    }
    if (h.parsed_accuracy < 0 || h.parsed_accuracy > 1)
        throw ParseError("bank line: accuracy out of [0,1]: " + decimal);
    (void)index;
    return h;
}

bool bank_orders_before(const Hypothesis& a, const Hypothesis& b) {
    if (a.total > 0 && b.total > 0) {
        int64_t lhs = int64_t(a.matches) * b.total;
        int64_t rhs = int64_t(b.matches) * a.total;
        if (lhs != rhs) return lhs > rhs;
    } else {
        double av = a.accuracy(), bv = b.accuracy();
        if (av != bv) return av > bv;
    }
    return a.text < b.text;
}

HypothesisBank::HypothesisBank(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw ConfigError("hypothesis bank capacity must be >= 1");
}

void HypothesisBank::insert(Hypothesis h) {
    const std::string key = dedupe_key(h.text);
    auto same = std::find_if(entries_.begin(), entries_.end(),
                             [&](const Hypothesis& e) { return dedupe_key(e.text) == key; });
    if (same != entries_.end()) return;  // scored once, appears once
    auto pos = std::upper_bound(entries_.begin(), entries_.end(), h,
                                [](const Hypothesis& a, const Hypothesis& b) {
                                    return bank_orders_before(a, b);
                                });
    entries_.insert(pos, std::move(h));
    if (static_cast<int>(entries_.size()) > capacity_) entries_.resize(capacity_);
}

bool HypothesisBank::contains(const std::string& text) const {
    const std::string key = dedupe_key(text);
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Hypothesis& e) { return dedupe_key(e.text) == key; });
}

std::vector<std::string> HypothesisBank::render_lines() const {
    std::vector<std::string> lines;
    lines.reserve(entries_.size());
    for (size_t i = 0; i < entries_.size(); ++i)
        lines.push_back(render_bank_line(static_cast<int>(i) + 1, entries_[i]));
    return lines;
}

json HypothesisBank::to_json_payload() const {
    return json{{"capacity", capacity_}, {"entries", entries_}, {"lines", render_lines()}};
}

HypothesisBank HypothesisBank::from_json_payload(const json& payload) {
    HypothesisBank bank(payload.at("capacity").get<int>());
    for (const auto& e : payload.at("entries")) bank.insert(e.get<Hypothesis>());
    return bank;
}

std::vector<std::string> parse_numbered_list(const std::string& text, int expected_n) {
    if (expected_n < 1) throw ConfigError("parse_numbered_list: expected_n must be >= 1");

    // Marker k = "<k>." at a token boundary, followed by whitespace or '['.
    auto find_marker = [&](int k, size_t from) -> std::pair<size_t, size_t> {
        const std::string digits = std::to_string(k);
        size_t pos = from;
        while (pos < text.size()) {
            pos = text.find(digits, pos);
            if (pos == std::string::npos) break;
            size_t dot = pos + digits.size();
            bool boundary_before =
                pos == 0 || std::isspace(static_cast<unsigned char>(text[pos - 1])) ||
                text[pos - 1] == ',' || text[pos - 1] == '(' || text[pos - 1] == '[' ||
                text[pos - 1] == ':';
            bool dot_after = dot < text.size() && text[dot] == '.';
            bool space_after = dot + 1 >= text.size() ||
                               std::isspace(static_cast<unsigned char>(text[dot + 1])) ||
                               text[dot + 1] == '[';
            if (boundary_before && dot_after && space_after) return {pos, dot + 1};
            ++pos;
        }
        return {std::string::npos, std::string::npos};
    };

    std::vector<std::pair<size_t, size_t>> markers;  // (start, content_begin)
    size_t cursor = 0;
    for (int k = 1;; ++k) {
        auto [start, content] = find_marker(k, cursor);
        if (start == std::string::npos) break;
        markers.emplace_back(start, content);
        cursor = content;
    }
    if (static_cast<int>(markers.size()) != expected_n) {
        throw ParseError("numbered list: expected " + std::to_string(expected_n) +
                         " items, found " + std::to_string(markers.size()));
    }

    auto cleanup = [](std::string item) {
        auto trim = [](std::string& s) {
            size_t b = s.find_first_not_of(" \t\r\n");
            size_t e = s.find_last_not_of(" \t\r\n");
            s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
        };
        trim(item);
        while (!item.empty() && item.back() == ',') {
            item.pop_back();
            trim(item);
        }
        if (item.size() >= 2 && item.front() == '[' && item.back() == ']') {
            item = item.substr(1, item.size() - 2);
            trim(item);
        }
        return item;
    };

    std::vector<std::string> items;
    items.reserve(markers.size());
    for (size_t i = 0; i < markers.size(); ++i) {
        size_t begin = markers[i].second;
        size_t end = i + 1 < markers.size() ? markers[i + 1].first : text.size();
        std::string item = cleanup(text.substr(begin, end - begin));
        if (item.empty())
            throw ParseError("numbered list: item " + std::to_string(i + 1) + " is empty");
        items.push_back(std::move(item));
    }
    return items;
}

namespace {

gateway::CompletionRequest make_request(const ModelRef& model, std::string system,
                                        std::string user, DecodingConfig decoding) {
    gateway::CompletionRequest request;
    request.provider_id = model.provider_id;
    request.model_name = model.model_name;
    request.system_prompt = std::move(system);
    request.user_prompt = std::move(user);
    request.decoding = decoding;
    return request;
}

}  // namespace

std::vector<std::string> propose_hypotheses(const std::vector<LabeledObservation>& batch, int n,
                                            const PromptTemplateSet& templates,
                                            const ModelRef& model, gateway::Gateway& gw,
                                            const DecodingConfig& decoding,
                                            int parse_retry_budget) {
    if (batch.empty()) throw ProtocolError("propose_hypotheses: empty observation batch");
    const std::string observations = render_observations(templates.observations, batch);
    const std::string num = std::to_string(n);
    const std::string system =
        render_template(templates.batched_generation_system, {{"num_hypotheses", num}});
    const std::string user = render_template(
        templates.batched_generation_user, {{"observations", observations}, {"num_hypotheses", num}});

    for (int retry = 0;; ++retry) {
        DecodingConfig attempt_decoding = decoding;
        if (retry > 0) attempt_decoding.seed = decoding.seed.value_or(0) + retry;
        auto response = gw.complete(make_request(model, system, user, attempt_decoding));
        try {
            return parse_numbered_list(response.text, n);
        } catch (const ParseError&) {
            if (retry >= parse_retry_budget) throw;
        }
    }
}

answer::GradeLabel parse_prediction(const std::string& completion) {
    const std::string lowered = [&] {
        std::string s = completion;
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    }();
    size_t pos = lowered.rfind("final answer");
    if (pos == std::string::npos)
        throw ParseError("prediction: no 'Final answer' sentinel in completion");
    size_t begin = lowered.find_first_of(":", pos);
    if (begin == std::string::npos) throw ParseError("prediction: sentinel missing ':'");
    ++begin;
    while (begin < lowered.size() &&
           !std::isalpha(static_cast<unsigned char>(lowered[begin])))
        ++begin;
    size_t end = begin;
    while (end < lowered.size() && std::isalpha(static_cast<unsigned char>(lowered[end]))) ++end;
    const std::string word = lowered.substr(begin, end - begin);
    if (word == "correct") return answer::GradeLabel::correct;
    if (word == "wrong" || word == "incorrect") return answer::GradeLabel::wrong;
    throw ParseError("prediction: expected correct/wrong, got '" + word + "'");
}

answer::GradeLabel predict_label(const std::string& hypothesis_text,
                                 const LabeledObservation& observation,
                                 const PromptTemplateSet& templates, const ModelRef& model,
                                 gateway::Gateway& gw, const DecodingConfig& decoding) {
    const std::string user = render_template(templates.inference_user,
                                             {{"hypothesis", hypothesis_text},
                                              {"problems", observation.problem_text},
                                              {"answers", observation.answer_text}});
    auto response =
        gw.complete(make_request(model, templates.inference_system.text, user, decoding));
    return parse_prediction(response.text);
}

answer::GradeLabel predict_label_multi(const std::vector<std::string>& hypothesis_texts,
                                       const LabeledObservation& observation,
                                       const PromptTemplateSet& templates, const ModelRef& model,
                                       gateway::Gateway& gw, const DecodingConfig& decoding) {
    std::string joined;
    for (size_t i = 0; i < hypothesis_texts.size(); ++i) {
        if (i > 0) joined += "\n";
        joined += std::to_string(i + 1) + ". " + hypothesis_texts[i];
    }
    const std::string user = render_template(templates.multi_inference_user,
                                             {{"hypotheses", joined},
                                              {"problems", observation.problem_text},
                                              {"answers", observation.answer_text}});
    auto response =
        gw.complete(make_request(model, templates.multi_inference_system.text, user, decoding));
    return parse_prediction(response.text);
}

Hypothesis score_hypothesis(const std::string& hypothesis_text,
                            const std::vector<LabeledObservation>& dataset,
                            const PromptTemplateSet& templates, const ModelRef& model,
                            gateway::Gateway& gw, const DecodingConfig& decoding,
                            int batch_index) {
    if (dataset.empty()) throw ProtocolError("score_hypothesis: empty dataset");
    Hypothesis h = Hypothesis::make(hypothesis_text, templates.granularity);
    h.model_name = model.model_name;
    h.batch_index = batch_index;
    h.total = static_cast<int>(dataset.size());

    std::vector<gateway::CompletionRequest> requests;
    requests.reserve(dataset.size());
    for (const auto& obs : dataset) {
        const std::string user = render_template(templates.inference_user,
                                                 {{"hypothesis", hypothesis_text},
                                                  {"problems", obs.problem_text},
                                                  {"answers", obs.answer_text}});
        requests.push_back(
            make_request(model, templates.inference_system.text, user, decoding));
    }
    auto results = gw.complete_batch(requests, gw.provider().config().parallelism);

    for (size_t i = 0; i < dataset.size(); ++i) {
        if (!results[i].ok) {
            // Gateway failures abort scoring; partial progress is the caller's
            // checkpoint concern.
            throw GatewayError("score_hypothesis: inference call " + std::to_string(i) +
                               " failed: " + results[i].error);
        }
        std::string predicted = "error";
        try {
            predicted = std::string(answer::to_string(parse_prediction(results[i].response.text)));
        } catch (const ParseError&) {
            // Unparseable prediction counts as a mismatch; N stays fixed.
        }
        h.predictions.push_back(predicted);
        if (predicted == answer::to_string(dataset[i].label)) ++h.matches;
    }
    return h;
}

HypothesisBank run_generation_loop(const std::vector<LabeledObservation>& dataset,
                                   const HypogenConfig& config,
                                   const PromptTemplateSet& templates, const ModelRef& model,
                                   gateway::Gateway& gw,
                                   const std::function<void(const HypothesisBank&)>& checkpoint) {
    if (config.batch_size < 1 || static_cast<size_t>(config.batch_size) > dataset.size())
        throw ConfigError("hypogen: batch_size must be in [1, dataset size]");

    HypothesisBank bank(config.bank_capacity);
    std::set<std::string> seen;
    SeededRng rng(config.seed);
    try {
        for (int b = 0; b < config.num_batches; ++b) {
            auto indices = rng.sample_indices(dataset.size(), config.batch_size);
            std::vector<LabeledObservation> batch;
            batch.reserve(indices.size());
            for (size_t i : indices) batch.push_back(dataset[i]);

            auto texts = propose_hypotheses(batch, config.proposals_per_batch, templates, model,
                                            gw, config.decoding, config.parse_retry_budget);
            for (auto& text : texts) {
                if (!seen.insert(dedupe_key(text)).second) continue;
                bank.insert(score_hypothesis(text, dataset, templates, model, gw,
                                             config.decoding, b));
            }
        }
    } catch (...) {
        if (checkpoint) checkpoint(bank);
        throw;
    }
    return bank;
}

}  // namespace weakbench::hypogen
