// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cyclesynth/backend.hpp"
#include "cyclesynth/config.hpp"
#include "cyclesynth/trainer.hpp"

namespace cyclesynth {

enum class StageStatus { pending, running, done, failed };

const char* to_string(StageStatus s);
StageStatus stage_status_from_string(std::string_view s);

struct StageRecord {
  std::string name;
  StageStatus status = StageStatus::pending;
  std::string error;
};

struct ArtifactRecord {
  std::string path;  // relative to the run directory, '/' separated
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// manifest.json of a run directory. Holds no timestamps, so two runs with
/// the same inputs produce the same manifest.
struct RunManifest {
  std::string run_id;
  Json config;  // snapshot taken at run start, secrets excluded
  std::map<std::string, std::string> templates;  // id -> sha256
  std::vector<StageRecord> stages;
  std::vector<ArtifactRecord> artifacts;
  Json counters = Json::object();
  Json training_jobs = Json::array();

  StageRecord& stage(std::string_view name);
  const StageRecord& stage(std::string_view name) const;
  bool complete() const;
};

Json to_json(const RunManifest& m);
RunManifest run_manifest_from_json(const Json& j);
RunManifest read_manifest(const std::filesystem::path& run_dir);

/// Every regular file under `run_dir` except manifest.json, sorted by path.
std::vector<ArtifactRecord> scan_artifacts(const std::filesystem::path& run_dir);

/// Stage order: segment, reformat, cycle, filter (when enabled), export.
std::vector<std::string> stage_names(const RunConfig& config);

/// Run directory layout:
///   manifest.json
///   segment/segmented.jsonl
///   reformat/standardized.jsonl, reformat/failures.jsonl
///   cycle/iter_<t>/..., cycle/final_dataset.jsonl, cycle/final_handles.json
///   filter/d_cycle.jsonl, filter/filter_report.jsonl,
///   filter/filter_summary.json
///   export/dataset.jsonl
///
/// A failing stage is marked failed in the manifest and the error rethrown;
/// resume() picks up at that stage.
class Pipeline {
 public:
  /// Backend and trainer come from the config unless injected.
  Pipeline(RunConfig config, std::filesystem::path run_dir,
           Backend* backend = nullptr, Trainer* trainer = nullptr);

  /// Starts a fresh run. Throws ConfigError if run_dir already holds one.
  RunManifest run();

  /// Continues the run in `run_dir` with the configuration stored in its
  /// manifest (secrets re-read from the environment).
  static RunManifest resume(const std::filesystem::path& run_dir,
                            Backend* backend = nullptr,
                            Trainer* trainer = nullptr);

 private:
  RunManifest execute(RunManifest manifest);
  void run_stage(const std::string& name, RunManifest& manifest);
  void save(RunManifest& manifest) const;

  RunConfig config_;
  std::filesystem::path run_dir_;
  std::unique_ptr<Backend> owned_backend_;
  std::unique_ptr<Trainer> owned_trainer_;
  Backend* backend_;
  Trainer* trainer_;
};

}  // namespace cyclesynth
