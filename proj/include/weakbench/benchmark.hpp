#pragma once

#include <string>
#include <vector>

#include "weakbench/types.hpp"

namespace weakbench {

enum class BenchmarkFormat { math_dir_json, jsonl };

BenchmarkFormat benchmark_format_from_string(std::string_view s);

struct RecordIssue {
    std::string location;  // "line 12" or a file path
    std::string message;
};

struct BenchmarkLoadResult {
    std::vector<Problem> problems;  // sorted by id
    std::vector<RecordIssue> errors;
    std::vector<std::string> duplicate_ids;
    size_t records_seen = 0;
};

/// Loads source-benchmark problems. Bad records are reported per index and
/// skipped; the load continues. Reference answers come from an explicit
/// answer field when present, otherwise from the last boxed expression in
/// the solution text.
BenchmarkLoadResult load_benchmark(const std::string& path, BenchmarkFormat format);

}  // namespace weakbench
