// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyclesynth/backend.hpp"
#include "cyclesynth/dataset.hpp"
#include "cyclesynth/kernels.hpp"
#include "cyclesynth/prompts.hpp"
#include "cyclesynth/trainer.hpp"

namespace cyclesynth {

/// A gold (question, answer) pair from a labeled corpus.
struct GoldPair {
  std::string pair_id;
  std::string question;
  std::string answer;
};

/// Reads {id?, instruction, response} rows; "output" is accepted for
/// "response", and a non-empty "input" field is appended to the instruction
/// after a blank line. Missing ids become g000000, g000001, ...
std::vector<GoldPair> read_gold_pairs(const std::filesystem::path& path);

enum class SeedMethod { random, cluster };

const char* to_string(SeedMethod m);
SeedMethod seed_method_from_string(std::string_view s);

struct SeedSet {
  std::vector<GoldPair> pairs;
  /// Positions in the gold corpus, ascending.
  std::vector<std::size_t> indices;
  SeedMethod method = SeedMethod::random;
  double fraction = 0.0;
  std::uint64_t rng_seed = 0;
};

/// round(fraction * n); throws ValidationError when that is zero or fraction
/// is outside (0, 1].
std::size_t seed_target(std::size_t n, double fraction);

/// Random mode ignores `answer_embeddings`. Cluster mode runs k-means with
/// k = target over the answer embeddings (row i = gold[i]) and takes the
/// member nearest each centroid; an empty cluster contributes the nearest
/// not yet selected point instead.
SeedSet sample_seed(const std::vector<GoldPair>& gold, SeedMethod method,
                    double fraction, std::uint64_t rng_seed,
                    const PointSet* answer_embeddings = nullptr,
                    KernelMode mode = KernelMode::parallel);

/// Embeds the answers through `client` when the method needs them.
SeedSet sample_seed(const std::vector<GoldPair>& gold, SeedMethod method,
                    double fraction, std::uint64_t rng_seed, Client& client,
                    const ModelHandle& encoder);

/// Backward job: input = pseudo_instruction framing of a, target = q.
TrainingJobSpec emit_inverse_training(const SeedSet& seed,
                                      const PromptRegistry& prompts,
                                      std::string job_id,
                                      const ModelHandle& base,
                                      const Hyperparameters& hyper);

/// One pair (inverse(a), a) per answer record.
std::vector<PseudoPair> generate_pseudo_questions(
    const std::vector<Record>& answers, const ModelHandle& inverse,
    Client& client, const PromptRegistry& prompts,
    const GenerationParams& params, std::vector<StageFailure>& failures);

/// Forward job: input = pseudo_answer framing of the pseudo question,
/// target = gold answer.
TrainingJobSpec emit_bt_training(const std::vector<PseudoPair>& pairs,
                                 const PromptRegistry& prompts,
                                 std::string job_id, const ModelHandle& base,
                                 const Hyperparameters& hyper);

void write_seed_set(const std::filesystem::path& path, const SeedSet& seed);

struct BaselineConfig {
  SeedMethod method = SeedMethod::random;
  double fraction = 0.05;
  std::uint64_t rng_seed = 0;
  GenerationParams generation;
  Hyperparameters hyper;
};

struct BaselineResult {
  SeedSet seed;
  ModelHandle inverse;
  std::vector<PseudoPair> bt_pairs;
  std::vector<StageFailure> failures;
  ModelHandle forward;
};

/// Seed selection, inverse model training, pseudo questions for every
/// non-seed answer, and the back-translation job. Writes seed_set.jsonl,
/// sft_inverse.jsonl, job_inverse.json, bt_dataset.jsonl, sft_bt.jsonl,
/// job_bt.json and failures_bt.jsonl under `out_dir`.
BaselineResult run_baseline(const std::vector<GoldPair>& gold,
                            const BaselineConfig& config, Client& client,
                            Trainer& trainer, const PromptRegistry& prompts,
                            const ModelHandle& encoder, const ModelHandle& base,
                            const std::filesystem::path& out_dir,
                            const std::string& run_tag);

}  // namespace cyclesynth
