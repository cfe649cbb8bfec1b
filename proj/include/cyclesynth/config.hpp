// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "cyclesynth/backend.hpp"
#include "cyclesynth/cycle.hpp"
#include "cyclesynth/evalkit.hpp"
#include "cyclesynth/filter.hpp"
#include "cyclesynth/mock_backend.hpp"
#include "cyclesynth/trainer.hpp"

namespace cyclesynth {

struct BackendConfig {
  std::string kind = "mock";  // mock | http
  std::string base_url;
  std::string api_key;  // never written to snapshots
  int timeout_s = 120;
  std::size_t max_in_flight = 4;
  bool single_flight = false;
  RetryPolicy retry;
  std::size_t embed_dim = 256;  // mock only
};

struct TrainerConfig {
  std::string kind = "mock";  // mock | http
  std::string endpoint;
  std::string api_key;
  int poll_interval_ms = 2000;
  int timeout_s = 12 * 3600;
};

struct ModelsConfig {
  std::string base = "base";
  std::string encoder = "encoder";
  std::string judge = "judge";
};

/// Everything a run needs. Keys of the JSON file mirror the field names;
/// unknown top-level keys are rejected.
struct RunConfig {
  std::string run_id = "run";
  std::filesystem::path input;
  std::filesystem::path template_dir;
  BackendConfig backend;
  TrainerConfig trainer;
  ModelsConfig models;
  GenerationParams generation;
  Hyperparameters hyperparameters;
  CycleConfig cycle;
  FilterConfig filter;
  bool run_filter = true;
  JudgeConfig judge;

  void validate() const;
};

/// Defaults, overlaid with `path` when given. Relative input and template
/// paths are resolved against the config file's directory.
RunConfig load_config(const std::optional<std::filesystem::path>& path);
RunConfig config_from_json(const Json& j,
                           const std::filesystem::path& base_dir = {});

/// CYCLESYNTH_API_KEY, CYCLESYNTH_BASE_URL, CYCLESYNTH_TRAINER_URL,
/// CYCLESYNTH_TEMPLATES.
void apply_env(RunConfig& config);

/// Full snapshot with secrets left out.
Json to_json(const RunConfig& config);

ModelHandle base_handle(const RunConfig& config);
ModelHandle encoder_handle(const RunConfig& config);
ModelHandle judge_handle(const RunConfig& config);

std::unique_ptr<Backend> make_backend(const BackendConfig& config);
std::unique_ptr<Trainer> make_trainer(const TrainerConfig& config);
ClientOptions client_options(const BackendConfig& config);

}  // namespace cyclesynth
