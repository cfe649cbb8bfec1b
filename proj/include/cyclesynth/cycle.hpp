// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cyclesynth/backend.hpp"
#include "cyclesynth/dataset.hpp"
#include "cyclesynth/prompts.hpp"
#include "cyclesynth/trainer.hpp"

namespace cyclesynth {

struct CycleConfig {
  int iterations = 1;
  GenerationParams generation;
  Hyperparameters hyper;
  /// Train each job from the previous checkpoint of the same direction
  /// instead of from the base model.
  bool continue_from_previous = false;

  void validate() const;
};

Json to_json(const CycleConfig& c);
CycleConfig cycle_config_from_json(const Json& j);

struct CycleHandles {
  ModelHandle forward;
  ModelHandle backward;
};

struct JobRecord {
  int iteration = 0;
  std::string job_id;
  ModelRole direction = ModelRole::forward;
  std::string base_handle;
  ModelHandle result;
};

Json to_json(const JobRecord& r);

struct FinalDataset {
  std::vector<PseudoPair> pairs;
  std::size_t q_side = 0;
  std::size_t a_side = 0;
};

struct CycleResult {
  FinalDataset final;
  std::vector<JobRecord> jobs;
  CycleHandles final_handles;
  std::vector<StageFailure> failures;
};

/// Step 1: a pseudo response for every gold instruction.
std::vector<PseudoPair> step1_pseudo_answers(
    const std::vector<Record>& instructions, const ModelHandle& forward,
    Client& client, const PromptRegistry& prompts,
    const GenerationParams& params, int iteration,
    std::vector<StageFailure>& failures);

/// Step 2: backward SFT job reconstructing gold instructions.
TrainingJobSpec step2_emit_backward_training(
    const std::vector<PseudoPair>& pairs, const PromptRegistry& prompts,
    std::string job_id, const ModelHandle& base, const Hyperparameters& hyper);

/// Step 3: a pseudo instruction for every gold response.
std::vector<PseudoPair> step3_pseudo_instructions(
    const std::vector<Record>& responses, const ModelHandle& backward,
    Client& client, const PromptRegistry& prompts,
    const GenerationParams& params, int iteration,
    std::vector<StageFailure>& failures);

/// Step 4: forward SFT job reconstructing gold responses.
TrainingJobSpec step4_emit_forward_training(
    const std::vector<PseudoPair>& pairs, const PromptRegistry& prompts,
    std::string job_id, const ModelHandle& base, const Hyperparameters& hyper);

/// Runs steps 1-4 `iterations` times and assembles the final dataset from the
/// last iteration's step-1 and step-3 pairs.
///
/// With a work directory every step is checkpointed under iter_<t>/
/// (pairs_step1.jsonl, sft_backward.jsonl, job_backward.json,
/// pairs_step3.jsonl, sft_forward.jsonl, job_forward.json, handles.json);
/// rerunning over the same directory resumes after the last finished step
/// and reuses its artifacts unchanged.
class CycleEngine {
 public:
  CycleEngine(Client& client, Trainer& trainer, const PromptRegistry& prompts,
              CycleConfig config,
              std::optional<std::filesystem::path> work_dir = std::nullopt,
              std::string run_tag = "run");

  CycleResult run(const StandardizedCorpus& corpus, const ModelHandle& base);

 private:
  Client& client_;
  Trainer& trainer_;
  const PromptRegistry& prompts_;
  CycleConfig config_;
  std::optional<std::filesystem::path> work_dir_;
  std::string run_tag_;
};

CycleResult run_cycles(const StandardizedCorpus& corpus,
                       const CycleConfig& config, Trainer& trainer,
                       Client& client, const PromptRegistry& prompts,
                       const ModelHandle& base);

void write_handles(const std::filesystem::path& path, const CycleHandles& h);
CycleHandles read_handles(const std::filesystem::path& path);

}  // namespace cyclesynth
