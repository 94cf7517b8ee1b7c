#include "weakbench/pipeline.hpp"

#include <algorithm>
#include <iostream>
#include <set>
#include <sstream>

#include "weakbench/digest.hpp"
#include "weakbench/error.hpp"
#include "weakbench/filter.hpp"
#include "weakbench/templates.hpp"

namespace weakbench::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

ModelRef parse_model_ref(const json& j) {
    return ModelRef{j.at("provider").get<std::string>(), j.at("model").get<std::string>()};
}

fs::path resolve(const fs::path& base, const fs::path& p) {
    return p.is_absolute() ? p : base / p;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
    PipelineConfig config;
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    config.raw = j;
    config.base_dir = fs::absolute(fs::path(path)).parent_path();

    config.run_id = j.value("run_id", config.run_id);
    // Run products land under the working directory; assets resolve
    // against the config file so a bundled config works from anywhere.
    config.store_root = resolve(fs::current_path(), j.value("store_root", std::string("runs")));
    config.cache_dir = resolve(fs::current_path(), j.value("cache_dir", std::string("cache")));

    for (const auto& p : j.at("providers")) {
        gateway::ProviderConfig pc;
        pc.id = p.at("id").get<std::string>();
        pc.kind = gateway::provider_kind_from_string(p.at("kind").get<std::string>());
        pc.endpoint = p.value("endpoint", "");
        pc.api_path = p.value("api_path", pc.api_path);
        pc.api_key_env = p.value("api_key_env", "");
        if (p.contains("script"))
            pc.script_path = resolve(config.base_dir, p.at("script").get<std::string>()).string();
        pc.parallelism = p.value("parallelism", pc.parallelism);
        pc.timeout_s = p.value("timeout_s", pc.timeout_s);
        if (p.contains("retry")) {
            pc.retry.max_attempts = p.at("retry").value("max_attempts", pc.retry.max_attempts);
            pc.retry.backoff_ms = p.at("retry").value("backoff_ms", pc.retry.backoff_ms);
        }
        pc.send_extensions = p.value("send_extensions", true);
        pc.require_all_entries_used = p.value("require_all_entries_used", false);
        config.providers.push_back(std::move(pc));
    }

    const json& models = j.at("models");
    config.target = parse_model_ref(models.at("target"));
    config.hypothesis_model = parse_model_ref(models.at("hypothesis"));
    config.generator =
        models.contains("generator") ? parse_model_ref(models.at("generator")) : config.target;
    config.judge =
        models.contains("judge") ? parse_model_ref(models.at("judge")) : config.generator;
    for (const auto& s : models.at("solvers")) config.solvers.push_back(parse_model_ref(s));

    const json& bench = j.at("benchmark");
    config.benchmark_path =
        resolve(config.base_dir, bench.at("path").get<std::string>()).string();
    config.benchmark_format =
        benchmark_format_from_string(bench.value("format", std::string("jsonl")));

    if (j.contains("granularities")) {
        for (const auto& g : j.at("granularities"))
            config.granularities.push_back(granularity_from_string(g.get<std::string>()));
    } else {
        config.granularities = all_granularities();
    }

    const json& assets = j.at("assets");
    config.prompt_dir = resolve(config.base_dir, assets.at("prompt_dir").get<std::string>());
    config.taxonomy_dir = resolve(config.base_dir, assets.at("taxonomy_dir").get<std::string>());
    config.generation_template_path =
        resolve(config.base_dir, assets.at("generation_template").get<std::string>());

    const json stages = j.value("stages", json::object());
    if (stages.contains("filter")) {
        const json& s = stages.at("filter");
        config.attempts_k = s.value("k", config.attempts_k);
        if (s.contains("decoding")) config.filter_decoding = s.at("decoding").get<DecodingConfig>();
        config.correct_sample_size = s.value("correct_sample_size", config.correct_sample_size);
        config.filter_seed = s.value("seed", config.filter_seed);
    }
    if (stages.contains("hypothesize")) {
        const json& s = stages.at("hypothesize");
        config.hypogen.num_batches = s.value("num_batches", config.hypogen.num_batches);
        config.hypogen.batch_size = s.value("batch_size", config.hypogen.batch_size);
        config.hypogen.proposals_per_batch =
            s.value("proposals_per_batch", config.hypogen.proposals_per_batch);
        config.hypogen.bank_capacity = s.value("bank_capacity", config.hypogen.bank_capacity);
        config.hypogen.seed = s.value("seed", config.hypogen.seed);
        config.hypogen.parse_retry_budget =
            s.value("parse_retry_budget", config.hypogen.parse_retry_budget);
        if (s.contains("decoding")) config.hypogen.decoding = s.at("decoding").get<DecodingConfig>();
        config.hypogen.inference_mode = s.value("inference_mode", config.hypogen.inference_mode);
    }
    if (stages.contains("generate")) {
        const json& s = stages.at("generate");
        config.generation_n = s.value("n", config.generation_n);
        config.hypotheses_per_granularity =
            s.value("hypotheses_per_granularity", config.hypotheses_per_granularity);
        if (s.contains("decoding"))
            config.generation_decoding = s.at("decoding").get<DecodingConfig>();
        config.generation_parse_retry_budget =
            s.value("parse_retry_budget", config.generation_parse_retry_budget);
        config.screen_rules.judge_retry_budget =
            s.value("judge_retry_budget", config.screen_rules.judge_retry_budget);
        if (s.contains("judge_decoding"))
            config.screen_rules.judge_decoding = s.at("judge_decoding").get<DecodingConfig>();
    }
    if (stages.contains("keys")) {
        const json& s = stages.at("keys");
        if (s.contains("decoding"))
            config.key_rules.solver_decoding = s.at("decoding").get<DecodingConfig>();
        config.key_rules.max_symbolic_answer_len =
            s.value("max_symbolic_answer_len", config.key_rules.max_symbolic_answer_len);
    }
    if (stages.contains("evaluate")) {
        const json& s = stages.at("evaluate");
        config.eval_m = s.value("m", config.eval_m);
        config.attempts_per_problem = s.value("attempts_per_problem", config.attempts_per_problem);
        config.eval_seed = s.value("seed", config.eval_seed);
        config.baseline_rate = s.value("baseline_rate", config.baseline_rate);
        if (s.contains("decoding")) config.eval_decoding = s.at("decoding").get<DecodingConfig>();
    }
    config.auto_accept_majority = j.value("auto_accept_majority", false);

    config.validate();
    return config;
}

void PipelineConfig::validate() const {
    if (run_id.empty()) throw ConfigError("config: empty run_id");
    if (providers.empty()) throw ConfigError("config: no providers");
    std::set<std::string> ids;
    for (const auto& p : providers) {
        p.validate();
        if (!ids.insert(p.id).second) throw ConfigError("config: duplicate provider id " + p.id);
    }
    auto check_ref = [&](const ModelRef& ref, const char* name) {
        if (!ids.count(ref.provider_id))
            throw ConfigError(std::string("config: ") + name + " references unknown provider '" +
                              ref.provider_id + "'");
    };
    check_ref(target, "target model");
    check_ref(hypothesis_model, "hypothesis model");
    check_ref(generator, "generator model");
    check_ref(judge, "judge model");
    if (solvers.size() < 2) throw ConfigError("config: need at least 2 solver models");
    for (const auto& s : solvers) check_ref(s, "solver model");
    if (granularities.empty()) throw ConfigError("config: no granularities selected");
    if (attempts_k < 1) throw ConfigError("config: filter k must be >= 1");
    filter_decoding.validate();
    generation_decoding.validate();
    eval_decoding.validate();
    hypogen.decoding.validate();
    if (eval_m < 1) throw ConfigError("config: evaluate m must be >= 1");
    if (hypotheses_per_granularity < 1)
        throw ConfigError("config: hypotheses_per_granularity must be >= 1");
    if (!(baseline_rate >= 0.0 && baseline_rate <= 1.0))
        throw ConfigError("config: baseline_rate must be in [0,1]");
}

std::string PipelineConfig::digest() const { return sha256_hex(raw.dump()); }

Pipeline::Pipeline(PipelineConfig config)
    : config_(std::move(config)), store_(config_.store_root) {
    cache_ = std::make_shared<gateway::ResponseCache>(config_.cache_dir);
    for (const auto& pc : config_.providers) {
        gateways_[pc.id] =
            std::make_unique<gateway::Gateway>(gateway::make_provider(pc), cache_);
    }
    store_.create_run(config_.run_id);
}

gateway::Gateway& Pipeline::gateway_for(const std::string& provider_id) {
    auto it = gateways_.find(provider_id);
    if (it == gateways_.end()) throw ConfigError("unknown provider: " + provider_id);
    return *it->second;
}

uint64_t Pipeline::provider_calls() const {
    uint64_t total = 0;
    for (const auto& [_, gw] : gateways_) total += gw->provider_calls();
    return total;
}

json Pipeline::require_artifact(const std::string& name, std::string_view upstream_stage) {
    ArtifactAddress address{config_.run_id, name};
    if (!store_.exists(address))
        throw StoreError("missing artifact '" + name + "' from stage '" +
                         std::string(upstream_stage) + "'; run that stage first");
    return store_.load(address);
}

void Pipeline::record_manifest(Stage stage, const std::string& started, json stage_config) {
    RunManifest manifest;
    manifest.run_id = config_.run_id;
    manifest.stage = stage;
    manifest.config_digest = config_.digest();
    manifest.seeds = {{"filter", static_cast<int64_t>(config_.filter_seed)},
                      {"hypothesize", static_cast<int64_t>(config_.hypogen.seed)},
                      {"evaluate", static_cast<int64_t>(config_.eval_seed)}};
    for (Granularity g : config_.granularities) {
        fs::path asset = config_.prompt_dir / (std::string(to_string(g)) + ".yaml");
        if (fs::exists(asset))
            manifest.prompt_asset_digests[asset.filename().string()] =
                sha256_hex(read_file(asset));
    }
    if (fs::exists(config_.generation_template_path))
        manifest.prompt_asset_digests[config_.generation_template_path.filename().string()] =
            sha256_hex(read_file(config_.generation_template_path));
    manifest.started_at = started;
    manifest.finished_at = now_iso8601();
    manifest.stage_config = std::move(stage_config);
    store_.write_manifest(manifest);
}

void Pipeline::write_output(const std::string& filename, const std::string& content) {
    fs::path dir = store_.run_dir(config_.run_id) / "outputs";
    fs::create_directories(dir);
    write_file_atomic(dir / filename, content);
}

RunSummary Pipeline::run(std::vector<Stage> stages) {
    RunLock lock(store_, config_.run_id);
    summary_ = RunSummary{};

    auto requested = [&](Stage s) {
        return std::find(stages.begin(), stages.end(), s) != stages.end();
    };
    for (Stage stage : all_stages()) {
        if (!requested(stage)) continue;
        const std::string started = now_iso8601();
        try {
            switch (stage) {
                case Stage::filter: stage_filter(); break;
                case Stage::hypothesize: stage_hypothesize(); break;
                case Stage::generate: stage_generate(); break;
                case Stage::keys: stage_keys(); break;
                case Stage::review: stage_review(); break;
                case Stage::evaluate: stage_evaluate(); break;
                case Stage::report: stage_report(summary_); break;
            }
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw ProtocolError("stage '" + std::string(to_string(stage)) + "': " + e.what());
        }
        record_manifest(stage, started, config_.raw.value("stages", json::object()));
    }
    return summary_;
}

void Pipeline::stage_filter() {
    ArtifactAddress observations_address{config_.run_id, "filter.observations"};
    if (store_.exists(observations_address)) {
        summary_.artifacts.push_back(observations_address.str());
        return;  // already materialized
    }

    auto loaded = load_benchmark(config_.benchmark_path, config_.benchmark_format);
    for (const auto& issue : loaded.errors)
        std::cerr << "[weakbench] benchmark " << issue.location << ": " << issue.message << "\n";
    if (!loaded.duplicate_ids.empty())
        std::cerr << "[weakbench] benchmark: " << loaded.duplicate_ids.size()
                  << " duplicate statements dropped\n";

    // Dedupe by statement digest; k attempts per distinct problem.
    std::vector<Problem> problems;
    std::set<std::string> seen;
    for (auto& p : loaded.problems) {
        if (seen.insert(p.id).second) problems.push_back(std::move(p));
    }
    if (problems.empty()) throw ProtocolError("benchmark has no usable problems");

    // Resume from the attempt journal when a previous run was interrupted.
    filter::AttemptRunOptions options;
    options.k = config_.attempts_k;
    options.decoding = config_.filter_decoding;
    options.decoding.seed = static_cast<int64_t>(config_.filter_seed);
    for (const auto& record : store_.read_journal(config_.run_id, "filter.attempts"))
        options.resume_from.push_back(record.get<AttemptRecord>());

    auto& gw = gateway_for(config_.target.provider_id);
    auto records = filter::run_attempts(
        problems, config_.target, options, gw,
        [&](const AttemptRecord& r) { store_.append_journal(config_.run_id, "filter.attempts", r); });

    auto failures = filter::select_consistent_failures(records, config_.attempts_k);

    int solved = 0;
    {
        std::set<std::string> failure_set(failures.begin(), failures.end());
        std::set<std::string> solved_ids;
        for (const auto& r : records)
            if (r.label == answer::GradeLabel::correct) solved_ids.insert(r.problem_id);
        solved = static_cast<int>(solved_ids.size());
    }
    int correct_sample = config_.correct_sample_size >= 0
                             ? config_.correct_sample_size
                             : std::min<int>(static_cast<int>(failures.size()), solved);

    auto observations = filter::assemble_observation_dataset(problems, records, failures,
                                                             correct_sample, config_.filter_seed);

    summary_.artifacts.push_back(
        store_
            .store(config_.run_id, "filter.problems",
                   json{{"problems", problems}, {"duplicates_dropped", loaded.duplicate_ids.size()}})
            .str());
    summary_.artifacts.push_back(
        store_
            .store(config_.run_id, "filter.attempts",
                   json{{"k", config_.attempts_k}, {"records", records}})
            .str());
    summary_.artifacts.push_back(
        store_.store(config_.run_id, "filter.failures", json{{"ids", failures}}).str());
    summary_.artifacts.push_back(
        store_
            .store(config_.run_id, "filter.observations",
                   json{{"observations", observations},
                        {"correct_sample_size", correct_sample},
                        {"seed", config_.filter_seed}})
            .str());
    summary_.headlines["consistent_failures"] = std::to_string(failures.size());
}

void Pipeline::stage_hypothesize() {
    json payload = require_artifact("filter.observations", "filter");
    auto observations = payload.at("observations").get<std::vector<LabeledObservation>>();

    for (Granularity g : config_.granularities) {
        const std::string name = "hypothesize." + std::string(to_string(g));
        ArtifactAddress address{config_.run_id, name};
        if (store_.exists(address)) {
            summary_.artifacts.push_back(address.str());
            continue;
        }
        auto templates = hypogen::load_template_set(
            (config_.prompt_dir / (std::string(to_string(g)) + ".yaml")).string());
        auto& gw = gateway_for(config_.hypothesis_model.provider_id);

        hypogen::HypogenConfig hc = config_.hypogen;
        if (hc.batch_size > static_cast<int>(observations.size()))
            hc.batch_size = static_cast<int>(observations.size());

        auto checkpoint = [&](const hypogen::HypothesisBank& bank) {
            write_file_atomic(store_.run_dir(config_.run_id) / "journal" /
                                  (name + ".checkpoint.json"),
                              bank.to_json_payload().dump(2) + "\n");
        };
        auto bank = hypogen::run_generation_loop(observations, hc, templates,
                                                 config_.hypothesis_model, gw, checkpoint);

        summary_.artifacts.push_back(
            store_.store(config_.run_id, name, bank.to_json_payload()).str());
        std::string lines;
        for (const auto& line : bank.render_lines()) lines += line + "\n";
        write_output("hypotheses_" + std::string(to_string(g)) + ".txt", lines);
    }
}

void Pipeline::stage_generate() {
    auto generation_template =
        forge::load_generation_template(config_.generation_template_path.string());

    for (Granularity g : config_.granularities) {
        const std::string gname = std::string(to_string(g));
        const std::string name = "generate." + gname;
        ArtifactAddress address{config_.run_id, name};
        if (store_.exists(address)) {
            summary_.artifacts.push_back(address.str());
            continue;
        }
        json bank_payload = require_artifact("hypothesize." + gname, "hypothesize");
        auto bank = hypogen::HypothesisBank::from_json_payload(bank_payload);
        if (bank.entries().empty())
            throw ProtocolError("hypothesis bank for " + gname + " is empty");

        Taxonomy taxonomy =
            Taxonomy::load((config_.taxonomy_dir / (gname + ".json")).string());

        const int take = std::min<int>(config_.hypotheses_per_granularity,
                                       static_cast<int>(bank.entries().size()));
        std::vector<hypogen::Hypothesis> selected(bank.entries().begin(),
                                                  bank.entries().begin() + take);

        auto& generator_gw = gateway_for(config_.generator.provider_id);
        auto& judge_gw = gateway_for(config_.judge.provider_id);

        std::vector<forge::GeneratedProblem> all_problems;
        json by_hypothesis = json::object();
        for (const auto& hypothesis : selected) {
            const std::string prompt = forge::render_generation_prompt(
                generation_template, hypothesis, config_.generation_n, taxonomy);

            gateway::CompletionRequest request;
            request.provider_id = config_.generator.provider_id;
            request.model_name = config_.generator.model_name;
            request.system_prompt = "You are a professional math teacher.";
            request.user_prompt = prompt;
            request.decoding = config_.generation_decoding;

            std::vector<std::string> statements;
            for (int retry = 0;; ++retry) {
                auto attempt = request;
                if (retry > 0)
                    attempt.decoding.seed =
                        config_.generation_decoding.seed.value_or(0) + retry;
                auto response = generator_gw.complete(attempt);
                try {
                    statements = forge::parse_problem_list(response.text, config_.generation_n);
                    break;
                } catch (const ParseError&) {
                    if (retry >= config_.generation_parse_retry_budget) throw;
                }
            }

            auto screened = forge::screen_problems(statements, hypothesis.id, config_.judge,
                                                   judge_gw, config_.screen_rules);
            std::vector<std::string> kept_statements;
            json ids = json::array();
            for (auto& gp : screened) {
                if (gp.status == forge::ScreenStatus::kept)
                    kept_statements.push_back(gp.problem.statement);
                ids.push_back(gp.problem.id);
                all_problems.push_back(std::move(gp));
            }
            by_hypothesis[hypothesis.id] = ids;
            write_output("problems_" + gname + "_" + hypothesis.id + ".txt",
                         forge::render_quoted_list(kept_statements));
        }

        summary_.artifacts.push_back(
            store_
                .store(config_.run_id, name,
                       json{{"hypotheses", selected},
                            {"problems", all_problems},
                            {"by_hypothesis", by_hypothesis}})
                .str());
    }
}

void Pipeline::stage_keys() {
    for (Granularity g : config_.granularities) {
        const std::string gname = std::string(to_string(g));
        const std::string name = "keys." + gname;
        ArtifactAddress address{config_.run_id, name};
        if (store_.exists(address)) {
            summary_.artifacts.push_back(address.str());
            continue;
        }
        json generated = require_artifact("generate." + gname, "generate");
        auto problems = generated.at("problems").get<std::vector<forge::GeneratedProblem>>();

        auto& gw = gateway_for(config_.solvers.front().provider_id);
        std::vector<forge::AnswerKey> keys;
        for (const auto& gp : problems) {
            if (gp.status != forge::ScreenStatus::kept) continue;
            keys.push_back(forge::derive_answer_key(gp, config_.solvers, gw, config_.key_rules));
            if (keys.back().agreement == forge::Agreement::majority)
                std::cerr << "[weakbench] keys: majority with dissent on " << gp.problem.id
                          << ": " << keys.back().dissent_note << "\n";
        }
        summary_.artifacts.push_back(
            store_.store(config_.run_id, name, json{{"keys", keys}}).str());
    }
}

void Pipeline::stage_review() {
    for (Granularity g : config_.granularities) {
        const std::string gname = std::string(to_string(g));
        const std::string name = "review." + gname;
        ArtifactAddress address{config_.run_id, name};
        if (store_.exists(address)) {
            summary_.artifacts.push_back(address.str());
            continue;
        }
        json payload = require_artifact("keys." + gname, "keys");
        auto keys = payload.at("keys").get<std::vector<forge::AnswerKey>>();

        int pending = 0;
        for (auto& key : keys) {
            if (key.validation != forge::Validation::pending_review) continue;
            if (config_.auto_accept_majority && key.suggested_answer) {
                key.validation = forge::Validation::auto_accepted;
                key.final_answer = key.suggested_answer;
                key.review_note = "auto-accept-majority";
                store_.append_journal(config_.run_id, "review",
                                      json{{"problem_id", key.problem_id},
                                           {"action", "auto_accept_majority"},
                                           {"answer", *key.final_answer},
                                           {"at", now_iso8601()}});
                continue;
            }
            ++pending;
        }
        if (pending > 0 && !config_.auto_accept_majority)
            throw ReviewError(std::to_string(pending) + " answer keys for " + gname +
                              " need review; run the review subcommand or pass "
                              "--auto-accept-majority");
        summary_.artifacts.push_back(
            store_.store(config_.run_id, name, json{{"keys", keys}}).str());
    }
}

void Pipeline::review_session(std::istream& in, std::ostream& out) {
    RunLock lock(store_, config_.run_id);
    for (Granularity g : config_.granularities) {
        const std::string gname = std::string(to_string(g));
        ArtifactAddress address{config_.run_id, "review." + gname};
        if (store_.exists(address)) continue;

        json payload = require_artifact("keys." + gname, "keys");
        auto keys = payload.at("keys").get<std::vector<forge::AnswerKey>>();
        json generated = require_artifact("generate." + gname, "generate");
        auto problems = generated.at("problems").get<std::vector<forge::GeneratedProblem>>();
        std::map<std::string, std::string> statement_by_id;
        for (const auto& gp : problems) statement_by_id[gp.problem.id] = gp.problem.statement;

        for (auto& key : keys) {
            if (key.validation != forge::Validation::pending_review) continue;
            out << "=== review (" << gname << ") problem " << key.problem_id << " ===\n";
            out << statement_by_id[key.problem_id] << "\n";
            out << "agreement: " << to_string(key.agreement) << "\n";
            for (const auto& c : key.candidates)
                out << "  " << c.solver << " -> " << c.extracted << "\n";
            if (key.suggested_answer) out << "suggested: " << *key.suggested_answer << "\n";
            out << "decision [accept|override <answer>|reject|skip]: " << std::flush;

            std::string line;
            if (!std::getline(in, line)) line = "skip";
            std::istringstream cmd(line);
            std::string verb;
            cmd >> verb;
            if (verb == "skip" || verb.empty()) continue;

            forge::ReviewDecision decision;
            if (verb == "accept") {
                decision.kind = forge::ReviewDecision::Kind::accept;
            } else if (verb == "override") {
                decision.kind = forge::ReviewDecision::Kind::override_answer;
                std::getline(cmd, decision.answer);
                size_t b = decision.answer.find_first_not_of(' ');
                decision.answer = b == std::string::npos ? "" : decision.answer.substr(b);
            } else if (verb == "reject") {
                decision.kind = forge::ReviewDecision::Kind::reject;
            } else {
                out << "unknown command, skipping\n";
                continue;
            }
            const std::string ts = now_iso8601();
            key = forge::resolve_review(key, decision, ts);
            store_.append_journal(config_.run_id, "review",
                                  json{{"problem_id", key.problem_id},
                                       {"action", verb},
                                       {"answer", key.final_answer ? *key.final_answer : ""},
                                       {"note", decision.note},
                                       {"at", ts}});
        }
        store_.store(config_.run_id, "review." + gname, json{{"keys", keys}});
        out << "review." << gname << " written\n";
    }
}

void Pipeline::stage_evaluate() {
    for (Granularity g : config_.granularities) {
        const std::string gname = std::string(to_string(g));
        const std::string name = "evaluate." + gname;
        ArtifactAddress address{config_.run_id, name};
        if (store_.exists(address)) {
            summary_.artifacts.push_back(address.str());
            continue;
        }
        json generated = require_artifact("generate." + gname, "generate");
        json reviewed = require_artifact("review." + gname, "review");
        auto problems = generated.at("problems").get<std::vector<forge::GeneratedProblem>>();
        auto hypotheses = generated.at("hypotheses").get<std::vector<hypogen::Hypothesis>>();
        auto keys = reviewed.at("keys").get<std::vector<forge::AnswerKey>>();

        auto& gw = gateway_for(config_.target.provider_id);
        report::EvalOptions options;
        options.decoding = config_.eval_decoding;
        options.decoding.seed = static_cast<int64_t>(config_.eval_seed);
        options.attempts_per_problem = config_.attempts_per_problem;

        std::vector<report::SolveRateResult> results;
        for (size_t h = 0; h < hypotheses.size(); ++h) {
            std::vector<forge::GeneratedProblem> own;
            for (const auto& gp : problems) {
                if (gp.problem.source_hypothesis_id == hypotheses[h].id) own.push_back(gp);
            }
            auto pool = report::keyed_pool(own, keys);
            uint64_t seed = config_.eval_seed * 1000003ULL +
                            static_cast<uint64_t>(g) * 101ULL + h;
            auto sample = report::sample_pool(pool, config_.eval_m, seed);
            results.push_back(
                report::evaluate_solve_rate(sample, hypotheses[h], config_.target, gw, options));
        }
        summary_.artifacts.push_back(
            store_.store(config_.run_id, name, json{{"results", results}}).str());
    }
}

void Pipeline::stage_report(RunSummary& summary) {
    std::vector<report::SolveRateResult> results;
    std::vector<hypogen::Hypothesis> hypotheses;
    for (Granularity g : config_.granularities) {
        const std::string gname = std::string(to_string(g));
        json payload = require_artifact("evaluate." + gname, "evaluate");
        for (const auto& r : payload.at("results"))
            results.push_back(r.get<report::SolveRateResult>());
        json generated = require_artifact("generate." + gname, "generate");
        for (const auto& h : generated.at("hypotheses"))
            hypotheses.push_back(h.get<hypogen::Hypothesis>());
    }

    auto built = report::build_report(results, hypotheses, config_.baseline_rate);
    json rows = json::array();
    for (size_t i = 0; i < built.rows.size(); ++i) {
        json row = built.rows[i];
        row["accuracy"] = hypogen::render_accuracy(built.row_accuracy[i]);
        rows.push_back(std::move(row));
    }
    ArtifactAddress address = store_.store(
        config_.run_id, "report",
        json{{"rows", rows}, {"baseline_rate", built.baseline_rate}});
    summary.artifacts.push_back(address.str());

    const std::string table = built.text_table();
    write_output("report.txt", table);
    write_output("results.csv", built.results_csv());
    write_output("plot.csv", built.plot_csv());
    summary.report_text = table;
    for (const auto& r : built.rows) {
        summary.headlines[std::string(to_string(r.granularity)) + "/" + r.hypothesis_id] =
            report::percent_one_decimal(r.solve_rate()) + "%";
    }
}

}  // namespace weakbench::pipeline
