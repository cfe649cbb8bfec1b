// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_set>

#include "cyclesynth/cycle.hpp"
#include "cyclesynth/error.hpp"
#include "cyclesynth/kmeans.hpp"
#include "cyclesynth/random.hpp"

namespace cyclesynth {

std::vector<GoldPair> read_gold_pairs(const std::filesystem::path& path) {
  std::vector<GoldPair> out;
  std::unordered_set<std::string> ids;
  for (const auto& row : jsonl::read(path)) {
    GoldPair g;
    if (row.contains("id")) {
      g.pair_id = row["id"].is_string() ? row["id"].get<std::string>()
                                        : row["id"].dump();
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "g%06zu", out.size());
      g.pair_id = buf;
    }
    const char* answer_key = row.contains("response") ? "response" : "output";
    if (!row.contains("instruction") || !row.contains(answer_key)) {
      throw ValidationError("gold pair " + g.pair_id +
                            " needs instruction and response (or output)");
    }
    try {
      g.question = row["instruction"].get<std::string>();
      const std::string input = row.value("input", std::string());
      if (!input.empty()) g.question += "\n\n" + input;
      g.answer = row[answer_key].get<std::string>();
    } catch (const Json::exception& e) {
      throw ValidationError("gold pair " + g.pair_id + ": " + e.what());
    }
    if (g.question.empty() || g.answer.empty()) {
      throw ValidationError("gold pair " + g.pair_id + " has an empty side");
    }
    if (!ids.insert(g.pair_id).second) {
      throw ValidationError("duplicate gold pair id: " + g.pair_id);
    }
    out.push_back(std::move(g));
  }
  return out;
}

const char* to_string(SeedMethod m) {
  return m == SeedMethod::random ? "random" : "cluster";
}

SeedMethod seed_method_from_string(std::string_view s) {
  if (s == "random") return SeedMethod::random;
  if (s == "cluster") return SeedMethod::cluster;
  throw ConfigError("unknown seed method: " + std::string(s));
}

std::size_t seed_target(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("seed fraction must be in (0, 1]");
  }
  const auto target =
      static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
  if (target == 0) {
    throw ValidationError("seed fraction selects no pairs out of " +
                          std::to_string(n));
  }
  return target;
}

namespace {

std::vector<std::size_t> cluster_representatives(const PointSet& points,
                                                 std::size_t target,
                                                 std::uint64_t rng_seed,
                                                 KernelMode mode) {
  KMeansOptions opts;
  opts.k = target;
  opts.seed = rng_seed;
  opts.mode = mode;
  const ClusterModel model = kmeans(points, opts);

  const std::size_t n = points.size();
  std::vector<bool> taken(n, false);
  std::vector<std::size_t> picks;
  for (std::size_t c = 0; c < model.effective_k; ++c) {
    const auto centroid = model.centroids.row(c);
    std::size_t best = n;
    double best_sq = std::numeric_limits<double>::infinity();
    // Members first; an empty cluster falls back to any unselected point.
    for (int pass = 0; pass < 2 && best == n; ++pass) {
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        if (pass == 0 && model.assignments[i] != static_cast<int>(c)) continue;
        const double sq = kernels::squared_l2(points.row(i), centroid);
        if (sq < best_sq) {
          best_sq = sq;
          best = i;
        }
      }
    }
    if (best == n) continue;
    taken[best] = true;
    picks.push_back(best);
  }
  return picks;
}

}  // namespace

SeedSet sample_seed(const std::vector<GoldPair>& gold, SeedMethod method,
                    double fraction, std::uint64_t rng_seed,
                    const PointSet* answer_embeddings, KernelMode mode) {
  if (gold.empty()) throw ValidationError("seed selection: empty gold corpus");
  const std::size_t target = seed_target(gold.size(), fraction);

  SeedSet seed;
  seed.method = method;
  seed.fraction = fraction;
  seed.rng_seed = rng_seed;
  if (method == SeedMethod::random) {
    Rng rng(rng_seed);
    seed.indices = rng.sample_without_replacement(gold.size(), target);
  } else {
    if (answer_embeddings == nullptr ||
        answer_embeddings->size() != gold.size()) {
      throw ValidationError(
          "cluster seed selection needs one answer embedding per gold pair");
    }
    seed.indices =
        cluster_representatives(*answer_embeddings, target, rng_seed, mode);
  }
  std::sort(seed.indices.begin(), seed.indices.end());
  for (std::size_t i : seed.indices) seed.pairs.push_back(gold[i]);
  return seed;
}

SeedSet sample_seed(const std::vector<GoldPair>& gold, SeedMethod method,
                    double fraction, std::uint64_t rng_seed, Client& client,
                    const ModelHandle& encoder) {
  if (method == SeedMethod::random || gold.empty()) {
    return sample_seed(gold, method, fraction, rng_seed);
  }
  std::vector<std::string> answers;
  answers.reserve(gold.size());
  for (const auto& g : gold) answers.push_back(g.answer);
  const auto vecs = client.embed(answers, encoder);
  PointSet points(vecs.front().dim());
  for (const auto& v : vecs) points.push_back(v.values);
  return sample_seed(gold, method, fraction, rng_seed, &points);
}

TrainingJobSpec emit_inverse_training(const SeedSet& seed,
                                      const PromptRegistry& prompts,
                                      std::string job_id,
                                      const ModelHandle& base,
                                      const Hyperparameters& hyper) {
  std::vector<PseudoPair> pairs;
  pairs.reserve(seed.pairs.size());
  for (const auto& g : seed.pairs) {
    // Gold on both sides; framed like a step-2 example so the inverse model
    // sees the same prompt shape at training and generation time.
    pairs.push_back({g.pair_id, g.question, g.answer, GoldSide::instruction, 1,
                     PairDirection::q_to_a, g.pair_id});
  }
  return emit_training_job(pairs, GoldSide::instruction, prompts,
                           std::move(job_id), base, hyper);
}

std::vector<PseudoPair> generate_pseudo_questions(
    const std::vector<Record>& answers, const ModelHandle& inverse,
    Client& client, const PromptRegistry& prompts,
    const GenerationParams& params, std::vector<StageFailure>& failures) {
  std::vector<StageFailure> local;
  auto pairs = step3_pseudo_instructions(answers, inverse, client, prompts,
                                         params, 1, local);
  for (auto& f : local) {
    f.stage = "baseline/pseudo_questions";
    failures.push_back(std::move(f));
  }
  return pairs;
}

TrainingJobSpec emit_bt_training(const std::vector<PseudoPair>& pairs,
                                 const PromptRegistry& prompts,
                                 std::string job_id, const ModelHandle& base,
                                 const Hyperparameters& hyper) {
  return emit_training_job(pairs, GoldSide::response, prompts,
                           std::move(job_id), base, hyper);
}

void write_seed_set(const std::filesystem::path& path, const SeedSet& seed) {
  std::vector<Json> rows;
  rows.reserve(seed.pairs.size());
  for (std::size_t i = 0; i < seed.pairs.size(); ++i) {
    Json j;
    j["pair_id"] = seed.pairs[i].pair_id;
    j["instruction"] = seed.pairs[i].question;
    j["response"] = seed.pairs[i].answer;
    j["gold_index"] = seed.indices[i];
    j["selection"] = to_string(seed.method);
    j["fraction"] = seed.fraction;
    j["rng_seed"] = seed.rng_seed;
    rows.push_back(std::move(j));
  }
  jsonl::write(path, rows);
}

BaselineResult run_baseline(const std::vector<GoldPair>& gold,
                            const BaselineConfig& config, Client& client,
                            Trainer& trainer, const PromptRegistry& prompts,
                            const ModelHandle& encoder, const ModelHandle& base,
                            const std::filesystem::path& out_dir,
                            const std::string& run_tag) {
  std::filesystem::create_directories(out_dir);
  BaselineResult result;
  result.seed = sample_seed(gold, config.method, config.fraction,
                            config.rng_seed, client, encoder);
  write_seed_set(out_dir / "seed_set.jsonl", result.seed);

  TrainingJobSpec inv = emit_inverse_training(
      result.seed, prompts, run_tag + "-inverse",
      derive_handle(base, ModelRole::backward), config.hyper);
  inv.dataset_path = "sft_inverse.jsonl";
  write_sft(out_dir / "sft_inverse.jsonl", inv.examples);
  jsonl::write_json(out_dir / "job_inverse.json", to_json(inv));
  result.inverse = trainer.submit(inv);

  // Every answer outside the seed is treated as unlabeled.
  std::vector<bool> in_seed(gold.size(), false);
  for (std::size_t i : result.seed.indices) in_seed[i] = true;
  std::vector<Record> answers;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (in_seed[i]) continue;
    answers.push_back({gold[i].pair_id, RecordKind::response, gold[i].answer,
                       gold[i].answer, "gold"});
  }
  if (answers.empty()) {
    throw ValidationError("baseline: the seed covers the whole corpus");
  }
  result.bt_pairs =
      generate_pseudo_questions(answers, result.inverse, client, prompts,
                                config.generation, result.failures);
  write_failures(out_dir / "failures_bt.jsonl", result.failures);
  write_dataset(out_dir / "bt_dataset.jsonl", result.bt_pairs);

  TrainingJobSpec bt = emit_bt_training(
      result.bt_pairs, prompts, run_tag + "-bt",
      derive_handle(base, ModelRole::forward), config.hyper);
  bt.dataset_path = "sft_bt.jsonl";
  write_sft(out_dir / "sft_bt.jsonl", bt.examples);
  jsonl::write_json(out_dir / "job_bt.json", to_json(bt));
  result.forward = trainer.submit(bt);
  return result;
}

}  // namespace cyclesynth
