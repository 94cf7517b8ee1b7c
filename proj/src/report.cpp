#include "weakbench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "weakbench/answer.hpp"
#include "weakbench/error.hpp"
#include "weakbench/filter.hpp"
#include "weakbench/rng.hpp"

namespace weakbench::report {

using nlohmann::json;

std::vector<KeyedProblem> keyed_pool(const std::vector<forge::GeneratedProblem>& problems,
                                     const std::vector<forge::AnswerKey>& keys) {
    std::map<std::string, const forge::AnswerKey*> key_by_id;
    for (const auto& k : keys) key_by_id[k.problem_id] = &k;

    std::vector<KeyedProblem> pool;
    for (const auto& gp : problems) {
        if (gp.status != forge::ScreenStatus::kept) continue;
        auto it = key_by_id.find(gp.problem.id);
        if (it == key_by_id.end()) continue;
        const forge::AnswerKey& key = *it->second;
        const bool accepted = key.validation == forge::Validation::auto_accepted ||
                              key.validation == forge::Validation::human_accepted ||
                              key.validation == forge::Validation::human_overridden;
        if (!accepted) continue;
        key.validate();
        KeyedProblem kp;
        kp.problem = gp.problem;
        kp.problem.reference_answer = key.final_answer;
        kp.validation = key.validation;
        pool.push_back(std::move(kp));
    }
    return pool;
}

std::vector<KeyedProblem> sample_pool(const std::vector<KeyedProblem>& pool, int m,
                                      uint64_t seed) {
    if (m < 1) throw ConfigError("sample_pool: m must be >= 1");
    if (static_cast<int>(pool.size()) < m)
        throw ProtocolError("sample_pool: pool has " + std::to_string(pool.size()) +
                            " problems, need " + std::to_string(m));
    for (const auto& kp : pool) {
        if (!kp.problem.reference_answer)
            throw ProtocolError("sample_pool: unkeyed problem in pool: " + kp.problem.id);
    }
    SeededRng rng(seed);
    auto indices = rng.sample_indices(pool.size(), static_cast<size_t>(m));
    std::sort(indices.begin(), indices.end());
    std::vector<KeyedProblem> sample;
    sample.reserve(indices.size());
    for (size_t i : indices) sample.push_back(pool[i]);
    return sample;
}

void to_json(json& j, const SolveRateResult& r) {
    j = json{{"hypothesis_id", r.hypothesis_id},
             {"hypothesis_text", r.hypothesis_text},
             {"granularity", std::string(to_string(r.granularity))},
             {"sample_size", r.sample_size},
             {"correct_count", r.correct_count},
             {"ungradable_count", r.ungradable_count},
             {"per_problem", r.per_problem}};
}

void from_json(const json& j, SolveRateResult& r) {
    r.hypothesis_id = j.at("hypothesis_id").get<std::string>();
    r.hypothesis_text = j.at("hypothesis_text").get<std::string>();
    r.granularity = granularity_from_string(j.at("granularity").get<std::string>());
    r.sample_size = j.at("sample_size").get<int>();
    r.correct_count = j.at("correct_count").get<int>();
    r.ungradable_count = j.at("ungradable_count").get<int>();
    r.per_problem = j.at("per_problem").get<std::vector<std::string>>();
}

SolveRateResult evaluate_solve_rate(const std::vector<KeyedProblem>& sample,
                                    const hypogen::Hypothesis& hypothesis,
                                    const ModelRef& target, gateway::Gateway& gw,
                                    const EvalOptions& options) {
    if (sample.empty()) throw ProtocolError("evaluate_solve_rate: empty sample");
    if (options.attempts_per_problem < 1)
        throw ConfigError("evaluate_solve_rate: attempts_per_problem must be >= 1");

    std::vector<gateway::CompletionRequest> requests;
    for (const auto& kp : sample) {
        if (!kp.problem.reference_answer)
            throw ProtocolError("evaluate_solve_rate: unkeyed problem: " + kp.problem.id);
        for (int a = 0; a < options.attempts_per_problem; ++a)
            requests.push_back(
                filter::solve_request(target, kp.problem.statement, options.decoding, a));
    }
    auto results = gw.complete_batch(requests, gw.provider().config().parallelism);

    SolveRateResult out;
    out.hypothesis_id = hypothesis.id;
    out.hypothesis_text = hypothesis.text;
    out.granularity = hypothesis.granularity;
    out.sample_size = static_cast<int>(sample.size());

    for (size_t p = 0; p < sample.size(); ++p) {
        bool any_correct = false;
        bool all_ungradable = true;
        for (int a = 0; a < options.attempts_per_problem; ++a) {
            const auto& item = results[p * options.attempts_per_problem + a];
            if (!item.ok) continue;  // failed call stays ungradable
            auto label = answer::grade_attempt(item.response.text,
                                               *sample[p].problem.reference_answer);
            if (label != answer::GradeLabel::ungradable) all_ungradable = false;
            if (label == answer::GradeLabel::correct) any_correct = true;
        }
        std::string grade = any_correct ? "correct" : (all_ungradable ? "ungradable" : "wrong");
        if (any_correct) ++out.correct_count;
        if (grade == "ungradable") ++out.ungradable_count;
        out.per_problem.push_back(sample[p].problem.id + ":" + grade);
    }
    return out;
}

std::string percent_one_decimal(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", fraction * 100.0);
    return buf;
}

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

std::string Report::text_table() const {
    size_t hyp_width = 10;
    for (const auto& r : rows) hyp_width = std::max(hyp_width, r.hypothesis_text.size());
    hyp_width = std::min<size_t>(hyp_width, 96);

    std::ostringstream out;
    auto line = [&] {
        out << "+" << std::string(18, '-') << "+" << std::string(hyp_width + 2, '-') << "+"
            << std::string(12, '-') << "+\n";
    };
    auto row = [&](const std::string& a, const std::string& b, const std::string& c) {
        std::string hyp = b.size() > hyp_width ? b.substr(0, hyp_width - 3) + "..." : b;
        out << "| " << a << std::string(17 - a.size(), ' ') << "| " << hyp
            << std::string(hyp_width + 1 - hyp.size(), ' ') << "| " << c
            << std::string(11 - c.size(), ' ') << "|\n";
    };
    line();
    row("Granularity", "Hypothesis", "Solve Rate");
    line();
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const bool new_group = i == 0 || r.granularity != rows[i - 1].granularity;
        if (i > 0 && new_group) line();
        std::string gran = new_group ? std::string(to_string(r.granularity)) : "";
        row(gran, r.hypothesis_text, percent_one_decimal(r.solve_rate()) + "%");
    }
    line();
    out << "Baseline (source benchmark): " << percent_one_decimal(baseline_rate) << "%\n";
    return out.str();
}

std::string Report::results_csv() const {
    std::ostringstream out;
    out << "granularity,hypothesis_id,hypothesis,accuracy,correct,sample_size,solve_rate_pct\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out << to_string(r.granularity) << "," << r.hypothesis_id << ","
            << csv_escape(r.hypothesis_text) << ","
            << hypogen::render_accuracy(i < row_accuracy.size() ? row_accuracy[i] : 0.0) << ","
            << r.correct_count << "," << r.sample_size << ","
            << percent_one_decimal(r.solve_rate()) << "\n";
    }
    return out.str();
}

std::string Report::plot_csv() const {
    std::ostringstream out;
    out << "granularity,hypothesis_id,solve_rate_pct,baseline_pct\n";
    for (const auto& r : rows) {
        out << to_string(r.granularity) << "," << r.hypothesis_id << ","
            << percent_one_decimal(r.solve_rate()) << "," << percent_one_decimal(baseline_rate)
            << "\n";
    }
    return out.str();
}

Report build_report(const std::vector<SolveRateResult>& results,
                    const std::vector<hypogen::Hypothesis>& hypotheses, double baseline_rate) {
    if (results.empty()) throw ProtocolError("build_report: no results");

    std::map<std::string, const hypogen::Hypothesis*> hyp_by_id;
    for (const auto& h : hypotheses) hyp_by_id[h.id] = &h;

    Report report;
    report.baseline_rate = baseline_rate;
    report.rows = results;
    auto accuracy_of = [&](const SolveRateResult& r) {
        auto it = hyp_by_id.find(r.hypothesis_id);
        return it != hyp_by_id.end() ? it->second->accuracy() : 0.0;
    };
    std::sort(report.rows.begin(), report.rows.end(),
              [&](const SolveRateResult& a, const SolveRateResult& b) {
                  if (a.granularity != b.granularity)
                      return static_cast<int>(a.granularity) < static_cast<int>(b.granularity);
                  double aa = accuracy_of(a), ab = accuracy_of(b);
                  if (aa != ab) return aa > ab;
                  return a.hypothesis_text < b.hypothesis_text;
              });
    for (const auto& r : report.rows) report.row_accuracy.push_back(accuracy_of(r));
    return report;
}

std::vector<ParsedCsvRow> parse_results_csv(const std::string& csv) {
    std::vector<ParsedCsvRow> rows;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        auto fields = csv_split(line);
        if (fields.size() != 7) throw ParseError("results csv: expected 7 fields: " + line);
        ParsedCsvRow row;
        row.granularity = fields[0];
        row.hypothesis_id = fields[1];
        row.correct = std::stoi(fields[4]);
        row.sample_size = std::stoi(fields[5]);
        row.solve_rate_pct = fields[6];
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace weakbench::report
