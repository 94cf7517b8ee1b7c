#include "weakbench/store.hpp"

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "weakbench/digest.hpp"
#include "weakbench/error.hpp"

namespace weakbench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::filter: return "filter";
        case Stage::hypothesize: return "hypothesize";
        case Stage::generate: return "generate";
        case Stage::keys: return "keys";
        case Stage::review: return "review";
        case Stage::evaluate: return "evaluate";
        case Stage::report: return "report";
    }
    return "filter";
}

Stage stage_from_string(std::string_view s) {
    for (Stage st : all_stages())
        if (to_string(st) == s) return st;
    throw ParseError("unknown stage: " + std::string(s));
}

std::vector<Stage> all_stages() {
    return {Stage::filter, Stage::hypothesize, Stage::generate, Stage::keys,
            Stage::review, Stage::evaluate, Stage::report};
}

ArtifactAddress ArtifactAddress::parse(std::string_view address) {
    size_t slash = address.find('/');
    if (slash == std::string_view::npos || slash == 0 || slash + 1 == address.size())
        throw StoreError("malformed artifact address: " + std::string(address));
    return {std::string(address.substr(0, slash)), std::string(address.substr(slash + 1))};
}

void to_json(json& j, const RunManifest& m) {
    j = json{{"run_id", m.run_id},
             {"stage", std::string(to_string(m.stage))},
             {"config_digest", m.config_digest},
             {"prompt_asset_digests", m.prompt_asset_digests},
             {"seeds", m.seeds},
             {"started_at", m.started_at},
             {"finished_at", m.finished_at},
             {"stage_config", m.stage_config}};
}

void from_json(const json& j, RunManifest& m) {
    m.run_id = j.at("run_id").get<std::string>();
    m.stage = stage_from_string(j.at("stage").get<std::string>());
    m.config_digest = j.at("config_digest").get<std::string>();
    m.prompt_asset_digests =
        j.at("prompt_asset_digests").get<std::map<std::string, std::string>>();
    m.seeds = j.at("seeds").get<std::map<std::string, int64_t>>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.stage_config = j.at("stage_config");
}

namespace {

void validate_name(const std::string& name) {
    if (name.empty()) throw StoreError("empty artifact name");
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '_' || c == '.' || c == '-';
        if (!ok) throw StoreError("invalid character in artifact name: " + name);
    }
}

}  // namespace

ArtifactStore::ArtifactStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_);
}

fs::path ArtifactStore::run_dir(const std::string& run_id) const {
    validate_name(run_id);
    return root_ / run_id;
}

fs::path ArtifactStore::artifact_path(const ArtifactAddress& address) const {
    validate_name(address.name);
    return run_dir(address.run_id) / "artifacts" / (address.name + ".json");
}

void ArtifactStore::create_run(const std::string& run_id) {
    fs::create_directories(run_dir(run_id) / "artifacts");
    fs::create_directories(run_dir(run_id) / "manifest");
    fs::create_directories(run_dir(run_id) / "journal");
}

bool ArtifactStore::run_exists(const std::string& run_id) const {
    return fs::exists(run_dir(run_id));
}

ArtifactAddress ArtifactStore::store(const std::string& run_id, const std::string& name,
                                     const json& payload) {
    if (!run_exists(run_id)) throw StoreError("unknown run: " + run_id);
    ArtifactAddress address{run_id, name};
    fs::path path = artifact_path(address);
    if (fs::exists(path))
        throw StoreError("artifact already exists (immutable): " + address.str());
    const std::string body = payload.dump();
    json envelope{{"schema", std::string(kSchema)},
                  {"name", name},
                  {"digest", "sha256:" + sha256_hex(body)},
                  {"payload", payload}};
    fs::create_directories(path.parent_path());
    write_file_atomic(path, envelope.dump(2) + "\n");
    return address;
}

json ArtifactStore::load(const ArtifactAddress& address) const {
    fs::path path = artifact_path(address);
    if (!fs::exists(path)) throw StoreError("artifact not found: " + address.str());
    json envelope;
    try {
        envelope = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw StoreError("artifact unreadable: " + address.str() + ": " + e.what());
    }
    if (envelope.value("schema", "") != kSchema)
        throw StoreError("artifact schema mismatch: " + address.str());
    const json payload = envelope.at("payload");
    const std::string digest = "sha256:" + sha256_hex(payload.dump());
    if (envelope.value("digest", "") != digest)
        throw StoreError("artifact digest mismatch (corrupt): " + address.str());
    return payload;
}

bool ArtifactStore::exists(const ArtifactAddress& address) const {
    return fs::exists(artifact_path(address));
}

std::vector<std::string> ArtifactStore::list(const std::string& run_id) const {
    std::vector<std::string> names;
    fs::path dir = run_dir(run_id) / "artifacts";
    if (!fs::exists(dir)) return names;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") names.push_back(entry.path().stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

void ArtifactStore::write_manifest(const RunManifest& manifest) {
    if (!run_exists(manifest.run_id)) throw StoreError("unknown run: " + manifest.run_id);
    fs::path path =
        run_dir(manifest.run_id) / "manifest" / (std::string(to_string(manifest.stage)) + ".json");
    write_file_atomic(path, json(manifest).dump(2) + "\n");
}

std::optional<RunManifest> ArtifactStore::read_manifest(const std::string& run_id,
                                                        Stage stage) const {
    fs::path path = run_dir(run_id) / "manifest" / (std::string(to_string(stage)) + ".json");
    if (!fs::exists(path)) return std::nullopt;
    return json::parse(read_file(path)).get<RunManifest>();
}

void ArtifactStore::append_journal(const std::string& run_id, const std::string& journal,
                                   const json& record) {
    validate_name(journal);
    if (!run_exists(run_id)) throw StoreError("unknown run: " + run_id);
    fs::path path = run_dir(run_id) / "journal" / (journal + ".jsonl");
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot append to journal: " + path.string());
    out << record.dump() << "\n";
    out.flush();
}

std::vector<json> ArtifactStore::read_journal(const std::string& run_id,
                                              const std::string& journal) const {
    std::vector<json> records;
    fs::path path = run_dir(run_id) / "journal" / (journal + ".jsonl");
    if (!fs::exists(path)) return records;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(json::parse(line));
    }
    return records;
}

RunLock::RunLock(const ArtifactStore& store, const std::string& run_id) {
    fs::path dir = store.run_dir(run_id);
    fs::create_directories(dir);
    path_ = dir / ".lock";
    // O_EXCL-style create; fails when another writer holds the run.
    FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) {
        throw StoreError("run is locked by another process: " + run_id +
                         " (remove " + path_.string() + " if stale)");
    }
    std::fputs("locked\n", f);
    std::fclose(f);
}

RunLock::~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("short write: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string now_iso8601() {
    using namespace std::chrono;
    auto now = system_clock::now();
    std::time_t t = system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace weakbench
