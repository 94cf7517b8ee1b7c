#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace weakbench {

enum class Stage { filter, hypothesize, generate, keys, review, evaluate, report };

std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);
std::vector<Stage> all_stages();

/// Address of one immutable artifact: "<run_id>/<name>".
struct ArtifactAddress {
    std::string run_id;
    std::string name;

    std::string str() const { return run_id + "/" + name; }
    static ArtifactAddress parse(std::string_view address);
};

/// One record per stage execution: enough to re-run the stage exactly.
/// Timestamps live here (under manifest/), never inside stage artifacts,
/// so warm-cache replays stay byte-identical.
struct RunManifest {
    std::string run_id;
    Stage stage = Stage::filter;
    std::string config_digest;
    std::map<std::string, std::string> prompt_asset_digests;
    std::map<std::string, int64_t> seeds;
    std::string started_at;
    std::string finished_at;
    nlohmann::json stage_config;
};

void to_json(nlohmann::json& j, const RunManifest& m);
void from_json(const nlohmann::json& j, RunManifest& m);

/// On-disk run store: one directory per run, one file per stage artifact,
/// each with a self-describing header (schema version + payload digest).
/// Artifacts are immutable once written; reads verify the digest.
class ArtifactStore {
public:
    static constexpr std::string_view kSchema = "weakbench.artifact/1";

    explicit ArtifactStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    /// Creates the run directory; idempotent.
    void create_run(const std::string& run_id);
    bool run_exists(const std::string& run_id) const;

    ArtifactAddress store(const std::string& run_id, const std::string& name,
                          const nlohmann::json& payload);
    nlohmann::json load(const ArtifactAddress& address) const;
    bool exists(const ArtifactAddress& address) const;
    std::vector<std::string> list(const std::string& run_id) const;

    void write_manifest(const RunManifest& manifest);
    std::optional<RunManifest> read_manifest(const std::string& run_id, Stage stage) const;

    /// Append-only journals (attempt progress, review transitions).
    void append_journal(const std::string& run_id, const std::string& journal,
                        const nlohmann::json& record);
    std::vector<nlohmann::json> read_journal(const std::string& run_id,
                                             const std::string& journal) const;

    std::filesystem::path run_dir(const std::string& run_id) const;
    std::filesystem::path artifact_path(const ArtifactAddress& address) const;

private:
    std::filesystem::path root_;
};

/// Single-writer guard: holds <run_dir>/.lock for the lifetime of the object.
class RunLock {
public:
    RunLock(const ArtifactStore& store, const std::string& run_id);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::filesystem::path path_;
};

/// Atomic file write: temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// UTC timestamp, second resolution, ISO 8601.
std::string now_iso8601();

}  // namespace weakbench
