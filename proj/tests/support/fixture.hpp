#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace weakbench::testfix {

/// Paths into the source tree (assets, committed fixtures).
std::filesystem::path source_dir();
std::filesystem::path assets_dir();
std::filesystem::path fixture_dir();  // committed table1 fixture

/// Fresh scratch directory under the system temp root.
std::filesystem::path make_temp_dir(const std::string& tag);

struct Table1Fixture {
    std::string benchmark_jsonl;
    std::string mock_script_json;
    std::string config_json;
};

/// The scripted end-to-end fixture: 24 source problems, five granularities,
/// two hypotheses each, with eval responses tuned to the published solve
/// rates (low granularity 45% / 60%, baseline 90% / 95%, ...).
Table1Fixture build_table1_fixture();

/// Writes the three fixture files into dir.
void write_table1_fixture(const std::filesystem::path& dir);

}  // namespace weakbench::testfix
