#include "weakbench/benchmark.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "weakbench/answer.hpp"
#include "weakbench/error.hpp"
#include "weakbench/store.hpp"

namespace weakbench {

namespace fs = std::filesystem;
using nlohmann::json;

BenchmarkFormat benchmark_format_from_string(std::string_view s) {
    if (s == "math_dir_json") return BenchmarkFormat::math_dir_json;
    if (s == "jsonl") return BenchmarkFormat::jsonl;
    throw ConfigError("unknown benchmark format: " + std::string(s));
}

namespace {

std::optional<std::string> field(const json& j, std::initializer_list<const char*> names) {
    for (const char* name : names) {
        if (j.contains(name) && j.at(name).is_string()) {
            std::string v = j.at(name).get<std::string>();
            if (!v.empty()) return v;
        }
    }
    return std::nullopt;
}

/// One record -> one Problem, or an explanatory error message.
std::optional<std::string> record_to_problem(const json& j, Problem& out) {
    auto statement = field(j, {"problem", "statement", "question"});
    if (!statement) return "record missing statement field";

    std::optional<std::string> reference = field(j, {"answer", "reference_answer"});
    if (!reference) {
        if (auto solution = field(j, {"solution"})) {
            reference = answer::try_extract_final_answer(*solution);
            if (!reference) return "solution text has no boxed answer";
        }
    }
    if (!reference) return "record missing answer or solution field";

    out = Problem::from_statement(*statement, ProblemOrigin::source_benchmark);
    out.reference_answer = reference;
    out.subject = field(j, {"subject", "type"});
    out.level = field(j, {"level"});
    return std::nullopt;
}

void finish(BenchmarkLoadResult& result) {
    std::sort(result.problems.begin(), result.problems.end(),
              [](const Problem& a, const Problem& b) { return a.id < b.id; });
    std::set<std::string> seen;
    for (const auto& p : result.problems) {
        if (!seen.insert(p.id).second) result.duplicate_ids.push_back(p.id);
    }
}

}  // namespace

BenchmarkLoadResult load_benchmark(const std::string& path, BenchmarkFormat format) {
    BenchmarkLoadResult result;
    if (!fs::exists(path)) throw IoError("benchmark path not found: " + path);

    if (format == BenchmarkFormat::jsonl) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open benchmark file: " + path);
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            ++result.records_seen;
            std::string location = "line " + std::to_string(lineno);
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                result.errors.push_back({location, e.what()});
                continue;
            }
            Problem p;
            if (auto err = record_to_problem(j, p)) {
                result.errors.push_back({location, *err});
                continue;
            }
            result.problems.push_back(std::move(p));
        }
    } else {
        if (!fs::is_directory(path)) throw IoError("expected a directory: " + path);
        std::vector<fs::path> files;
        for (const auto& entry : fs::recursive_directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            ++result.records_seen;
            json j;
            try {
                j = json::parse(read_file(file));
            } catch (const json::exception& e) {
                result.errors.push_back({file.string(), e.what()});
                continue;
            }
            Problem p;
            if (auto err = record_to_problem(j, p)) {
                result.errors.push_back({file.string(), *err});
                continue;
            }
            result.problems.push_back(std::move(p));
        }
    }

    finish(result);
    return result;
}

}  // namespace weakbench
