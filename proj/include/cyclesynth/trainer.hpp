// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "cyclesynth/backend.hpp"

namespace cyclesynth {

/// LoRA SFT settings forwarded to the trainer service.
struct Hyperparameters {
  int lora_rank = 8;
  int lora_alpha = 16;
  double lora_dropout = 0.05;
  double learning_rate = 1e-4;
  std::string lr_schedule = "cosine";
  int micro_batch = 4;
  int effective_batch = 32;
  int cutoff_len = 1024;
  int epochs = 3;

  void validate() const;
};

Json to_json(const Hyperparameters& h);
Hyperparameters hyperparameters_from_json(const Json& j);

/// One supervised example; the trainer minimizes NLL(target | input) with the
/// input tokens masked out of the loss.
struct SftExample {
  std::string pair_id;
  std::string input;
  std::string target;
};

struct TrainingJobSpec {
  std::string job_id;
  ModelRole direction = ModelRole::forward;  // forward or backward only
  std::vector<SftExample> examples;
  std::string dataset_path;  // informational; the wire carries examples inline
  Hyperparameters hyper;
  ModelHandle base;
  std::string objective = "nll(target|input)";

  /// Throws ValidationError for an empty dataset, empty fields, a direction
  /// other than forward/backward, or bad hyperparameters.
  void validate() const;
};

/// Job file layout (dataset referenced by path).
Json to_json(const TrainingJobSpec& job);
/// POST /v1/training-jobs body:
///   {job_id, direction, dataset_inline: [{input, target}], hyperparameters,
///    base_model}
Json training_wire_request(const TrainingJobSpec& job);

Json to_json(const SftExample& e);

class Trainer {
 public:
  virtual ~Trainer() = default;
  /// Blocks until the job resolves; returns the trained handle with the
  /// job id appended to its lineage. Throws TrainerError.
  virtual ModelHandle submit(const TrainingJobSpec& job) = 0;
  virtual std::string name() const = 0;
};

struct MockTrainerOptions {
  /// Trained handles get the job id as handle id instead of reusing the base.
  bool rename_handles = false;
  std::set<std::string> fail_jobs;
};

/// Identity trainer: the returned handle serves the same weights as its base.
class MockTrainer : public Trainer {
 public:
  explicit MockTrainer(MockTrainerOptions options = {});

  ModelHandle submit(const TrainingJobSpec& job) override;
  std::string name() const override { return "mock"; }

  std::vector<std::string> submitted() const;
  void clear_failures();

 private:
  MockTrainerOptions options_;
  mutable std::mutex mu_;
  std::vector<std::string> submitted_;
};

struct HttpTrainerOptions {
  std::string endpoint;
  std::string api_key;
  std::chrono::milliseconds poll_interval{2000};
  std::chrono::milliseconds timeout{std::chrono::hours(12)};
};

/// Talks to a trainer service:
///   POST /v1/training-jobs      -> {job_id}
///   GET  /v1/training-jobs/{id} -> {status, model_id?, error?}
class HttpTrainer : public Trainer {
 public:
  explicit HttpTrainer(HttpTrainerOptions options);

  ModelHandle submit(const TrainingJobSpec& job) override;
  std::string name() const override { return "http"; }

 private:
  HttpTrainerOptions options_;
  std::string origin_;
  std::string prefix_;
};

}  // namespace cyclesynth
