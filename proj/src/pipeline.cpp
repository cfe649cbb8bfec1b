// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/pipeline.hpp"

#include <algorithm>
#include <cstdlib>

#include "cyclesynth/corpus.hpp"
#include "cyclesynth/cycle.hpp"
#include "cyclesynth/dataset.hpp"
#include "cyclesynth/error.hpp"
#include "cyclesynth/filter.hpp"
#include "cyclesynth/hash.hpp"
#include "cyclesynth/prompts.hpp"
#include "cyclesynth/reformat.hpp"

namespace cyclesynth {

namespace fs = std::filesystem;

const char* to_string(StageStatus s) {
  switch (s) {
    case StageStatus::pending: return "pending";
    case StageStatus::running: return "running";
    case StageStatus::done: return "done";
    case StageStatus::failed: return "failed";
  }
  return "pending";
}

StageStatus stage_status_from_string(std::string_view s) {
  if (s == "pending") return StageStatus::pending;
  if (s == "running") return StageStatus::running;
  if (s == "done") return StageStatus::done;
  if (s == "failed") return StageStatus::failed;
  throw ValidationError("unknown stage status: " + std::string(s));
}

StageRecord& RunManifest::stage(std::string_view name) {
  for (auto& s : stages) {
    if (s.name == name) return s;
  }
  throw ValidationError("manifest has no stage " + std::string(name));
}

const StageRecord& RunManifest::stage(std::string_view name) const {
  return const_cast<RunManifest*>(this)->stage(name);
}

bool RunManifest::complete() const {
  return std::all_of(stages.begin(), stages.end(), [](const StageRecord& s) {
    return s.status == StageStatus::done;
  });
}

Json to_json(const RunManifest& m) {
  Json j;
  j["run_id"] = m.run_id;
  j["config"] = m.config;
  j["templates"] = m.templates;
  Json stages = Json::array();
  for (const auto& s : m.stages) {
    Json sj;
    sj["name"] = s.name;
    sj["status"] = to_string(s.status);
    if (!s.error.empty()) sj["error"] = s.error;
    stages.push_back(std::move(sj));
  }
  j["stages"] = std::move(stages);
  Json artifacts = Json::array();
  for (const auto& a : m.artifacts) {
    Json aj;
    aj["path"] = a.path;
    aj["sha256"] = a.sha256;
    aj["bytes"] = a.bytes;
    artifacts.push_back(std::move(aj));
  }
  j["artifacts"] = std::move(artifacts);
  j["counters"] = m.counters;
  j["training_jobs"] = m.training_jobs;
  return j;
}

RunManifest run_manifest_from_json(const Json& j) {
  RunManifest m;
  m.run_id = j.at("run_id").get<std::string>();
  m.config = j.at("config");
  for (const auto& [k, v] : j.at("templates").items()) {
    m.templates[k] = v.get<std::string>();
  }
  for (const auto& sj : j.at("stages")) {
    m.stages.push_back({sj.at("name").get<std::string>(),
                        stage_status_from_string(sj.at("status").get<std::string>()),
                        sj.value("error", std::string())});
  }
  for (const auto& aj : j.at("artifacts")) {
    m.artifacts.push_back({aj.at("path").get<std::string>(),
                           aj.at("sha256").get<std::string>(),
                           aj.at("bytes").get<std::uintmax_t>()});
  }
  m.counters = j.value("counters", Json::object());
  m.training_jobs = j.value("training_jobs", Json::array());
  return m;
}

RunManifest read_manifest(const fs::path& run_dir) {
  const fs::path p = run_dir / "manifest.json";
  if (!fs::exists(p)) throw IoError("no manifest in " + run_dir.string());
  return run_manifest_from_json(jsonl::read_json(p));
}

std::vector<ArtifactRecord> scan_artifacts(const fs::path& run_dir) {
  std::vector<ArtifactRecord> out;
  if (!fs::exists(run_dir)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel =
        fs::relative(entry.path(), run_dir).generic_string();
    if (rel == "manifest.json") continue;
    out.push_back({rel, sha256_file(entry.path()), entry.file_size()});
  }
  std::sort(out.begin(), out.end(),
            [](const ArtifactRecord& a, const ArtifactRecord& b) {
              return a.path < b.path;
            });
  return out;
}

std::vector<std::string> stage_names(const RunConfig& config) {
  std::vector<std::string> names = {"segment", "reformat", "cycle"};
  if (config.run_filter) names.push_back("filter");
  names.push_back("export");
  return names;
}

Pipeline::Pipeline(RunConfig config, fs::path run_dir, Backend* backend,
                   Trainer* trainer)
    : config_(std::move(config)), run_dir_(std::move(run_dir)) {
  if (config_.template_dir.empty()) {
    config_.template_dir = PromptRegistry::default_dir();
  }
  config_.template_dir = fs::absolute(config_.template_dir).lexically_normal();
  if (!config_.input.empty()) {
    config_.input = fs::absolute(config_.input).lexically_normal();
  }
  config_.validate();
  if (backend == nullptr) {
    owned_backend_ = make_backend(config_.backend);
    backend = owned_backend_.get();
  }
  if (trainer == nullptr) {
    owned_trainer_ = make_trainer(config_.trainer);
    trainer = owned_trainer_.get();
  }
  backend_ = backend;
  trainer_ = trainer;
}

void Pipeline::save(RunManifest& manifest) const {
  manifest.artifacts = scan_artifacts(run_dir_);
  jsonl::write_json(run_dir_ / "manifest.json", to_json(manifest));
}

RunManifest Pipeline::run() {
  if (fs::exists(run_dir_ / "manifest.json")) {
    throw ConfigError(run_dir_.string() +
                      " already holds a run; use resume or a new directory");
  }
  if (config_.input.empty()) throw ConfigError("config.input is not set");
  if (!fs::exists(config_.input)) {
    throw ConfigError("input not found: " + config_.input.string());
  }
  // Loading here surfaces a bad template directory before any work starts.
  const PromptRegistry prompts = PromptRegistry::load(config_.template_dir);

  fs::create_directories(run_dir_);
  RunManifest m;
  m.run_id = config_.run_id;
  m.config = to_json(config_);
  m.templates = prompts.file_hashes();
  for (const auto& name : stage_names(config_)) m.stages.push_back({name, StageStatus::pending, {}});
  save(m);
  return execute(std::move(m));
}

RunManifest Pipeline::resume(const fs::path& run_dir, Backend* backend,
                             Trainer* trainer) {
  RunManifest m = read_manifest(run_dir);
  RunConfig config = config_from_json(m.config);
  // Only secrets come from the environment; everything else is frozen.
  if (const char* v = std::getenv("CYCLESYNTH_API_KEY")) {
    config.backend.api_key = v;
    config.trainer.api_key = v;
  }
  Pipeline p(std::move(config), run_dir, backend, trainer);
  const PromptRegistry prompts = PromptRegistry::load(p.config_.template_dir);
  if (prompts.file_hashes() != m.templates) {
    throw ConfigError("templates changed since the run started");
  }
  return p.execute(std::move(m));
}

RunManifest Pipeline::execute(RunManifest manifest) {
  for (auto& record : manifest.stages) {
    if (record.status == StageStatus::done) continue;
    const std::string name = record.name;
    record.status = StageStatus::running;
    record.error.clear();
    save(manifest);
    try {
      run_stage(name, manifest);
    } catch (const std::exception& e) {
      auto& r = manifest.stage(name);
      r.status = StageStatus::failed;
      r.error = e.what();
      save(manifest);
      throw;
    }
    manifest.stage(name).status = StageStatus::done;
    save(manifest);
  }
  return manifest;
}

namespace {

void add_client_counters(Json& counters, const ClientCounters& before,
                         const ClientCounters& after) {
  Json& c = counters["client"];
  if (c.is_null()) {
    c = Json{{"requests", 0}, {"retries", 0}, {"failures", 0},
             {"overflows", 0}};
  }
  c["requests"] = c["requests"].get<std::uint64_t>() +
                  (after.requests - before.requests);
  c["retries"] =
      c["retries"].get<std::uint64_t>() + (after.retries - before.retries);
  c["failures"] =
      c["failures"].get<std::uint64_t>() + (after.failures - before.failures);
  c["overflows"] = c["overflows"].get<std::uint64_t>() +
                   (after.overflows - before.overflows);
}

}  // namespace

void Pipeline::run_stage(const std::string& name, RunManifest& manifest) {
  const PromptRegistry prompts = PromptRegistry::load(config_.template_dir);
  Client client(*backend_, client_options(config_.backend));
  const ModelHandle base = base_handle(config_);
  Json& counters = manifest.counters;
  const ClientCounters before = client.counters();

  if (name == "segment") {
    const auto docs = fs::is_directory(config_.input)
                          ? load_documents_dir(config_.input,
                                               config_.input.filename().string())
                          : load_documents_jsonl(config_.input);
    const SegmentedCorpus seg = segment_corpus(docs);
    write_segmented(run_dir_ / "segment" / "segmented.jsonl", seg);
    counters["segment"] = {{"documents", docs.size()},
                           {"questions", seg.n_questions()},
                           {"answers", seg.n_answers()}};
  } else if (name == "reformat") {
    const SegmentedCorpus seg =
        read_segmented(run_dir_ / "segment" / "segmented.jsonl");
    ReformatResult q =
        reformat_questions(seg, base, client, prompts, config_.generation);
    ReformatResult a =
        reformat_answers(seg, base, client, prompts, config_.generation);
    StandardizedCorpus std_corpus{std::move(q.records), std::move(a.records)};
    std::vector<StageFailure> failures = std::move(q.failures);
    failures.insert(failures.end(), a.failures.begin(), a.failures.end());
    write_failures(run_dir_ / "reformat" / "failures.jsonl", failures);
    write_standardized(run_dir_ / "reformat" / "standardized.jsonl",
                       std_corpus);
    counters["reformat"] = {{"question_passages", seg.n_questions()},
                            {"answer_passages", seg.n_answers()},
                            {"instructions", std_corpus.instructions.size()},
                            {"responses", std_corpus.responses.size()},
                            {"failures", failures.size()}};
  } else if (name == "cycle") {
    const StandardizedCorpus std_corpus =
        read_standardized(run_dir_ / "reformat" / "standardized.jsonl");
    CycleEngine engine(client, *trainer_, prompts, config_.cycle,
                       run_dir_ / "cycle", config_.run_id);
    // Jobs are recorded even if a later step fails, so a halted run shows
    // what was already trained.
    CycleResult result;
    try {
      result = engine.run(std_corpus, base);
    } catch (...) {
      add_client_counters(counters, before, client.counters());
      throw;
    }
    manifest.training_jobs = Json::array();
    for (const auto& job : result.jobs) {
      manifest.training_jobs.push_back(to_json(job));
    }
    counters["cycle"] = {{"iterations", config_.cycle.iterations},
                         {"q_side", result.final.q_side},
                         {"a_side", result.final.a_side},
                         {"final_pairs", result.final.pairs.size()},
                         {"failures", result.failures.size()}};
  } else if (name == "filter") {
    const auto pairs = read_pairs(run_dir_ / "cycle" / "final_dataset.jsonl");
    const CycleHandles handles =
        read_handles(run_dir_ / "cycle" / "final_handles.json");
    const FilterResult result = filter_dataset(
        pairs, handles, client, prompts, encoder_handle(config_),
        config_.filter);
    write_filter_outputs(run_dir_ / "filter", pairs, result, config_.filter);
    counters["filter"] = {{"input_pairs", pairs.size()},
                          {"kept_pairs", result.kept.size()},
                          {"unreconstructable", result.unreconstructable},
                          {"effective_k", result.effective_k}};
  } else if (name == "export") {
    const fs::path source = config_.run_filter
                                ? run_dir_ / "filter" / "d_cycle.jsonl"
                                : run_dir_ / "cycle" / "final_dataset.jsonl";
    const auto pairs = read_pairs(source);
    write_dataset(run_dir_ / "export" / "dataset.jsonl", pairs);
    counters["export"] = {{"pairs", pairs.size()}};
  } else {
    throw ValidationError("unknown stage " + name);
  }
  add_client_counters(counters, before, client.counters());
}

}  // namespace cyclesynth
