// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cyclesynth/backend.hpp"
#include "cyclesynth/cycle.hpp"
#include "cyclesynth/dataset.hpp"
#include "cyclesynth/kernels.hpp"
#include "cyclesynth/prompts.hpp"

namespace cyclesynth {

enum class PruningMode {
  /// Drop the farthest reconstructions in each cluster.
  distance_rank,
  /// Keep a greedy k-center cover of each cluster, starting from the best
  /// reconstruction.
  kcenter_coverage,
};

const char* to_string(PruningMode mode);
PruningMode pruning_mode_from_string(std::string_view s);

struct FilterConfig {
  std::size_t k_clusters = 200;
  double drop_fraction = 0.05;
  int kmeans_max_iters = 100;
  int kmeans_restarts = 1;
  std::uint64_t rng_seed = 0;
  PruningMode pruning_mode = PruningMode::distance_rank;
  /// Cluster instruction-gold and response-gold pairs in one pool. When
  /// false each side gets its own k-means with k_clusters.
  bool joint_clustering = true;
  KernelMode kernel_mode = KernelMode::parallel;
  GenerationParams generation;

  void validate() const;
};

Json to_json(const FilterConfig& c);
FilterConfig filter_config_from_json(const Json& j);

struct FilterVerdict {
  std::string pair_id;
  GoldSide gold_side = GoldSide::instruction;
  std::optional<std::string> reconstruction;
  /// Unset for unreconstructable pairs.
  std::optional<double> distance;
  int cluster_id = 0;
  bool kept = false;
  std::string reason;  // kept | pruned | unreconstructable
};

Json to_json(const FilterVerdict& v);

/// Everything pruning needs to know about one cluster member.
struct ClusterMember {
  std::string pair_id;
  double distance = 0.0;
  std::span<const double> embedding;
};

/// floor(fraction * size), capped so at least one member survives.
std::size_t drop_count(std::size_t size, double fraction);

/// Keep mask over `members`. Members are the reconstructable part of one
/// cluster; `cluster_size` is the full cluster size (including
/// unreconstructable pairs) the drop budget is computed from. The budget is
/// capped so at least one member stays. Throws ValidationError for an empty
/// member list.
std::vector<bool> prune_cluster(const std::vector<ClusterMember>& members,
                                std::size_t cluster_size,
                                const FilterConfig& config);
std::vector<bool> prune_cluster(const std::vector<ClusterMember>& members,
                                const FilterConfig& config);

/// A pair after reconstruction and scoring.
struct ScoredPair {
  std::string pair_id;
  GoldSide gold_side = GoldSide::instruction;
  std::optional<std::string> reconstruction;
  std::optional<double> distance;
};

struct ClusterSummary {
  int cluster_id = 0;
  std::size_t size = 0;
  std::size_t unreconstructable = 0;
  std::size_t dropped = 0;
  std::size_t kept = 0;
};

struct FilterResult {
  /// One per input pair, in input order.
  std::vector<FilterVerdict> verdicts;
  /// Input indices of kept pairs, ascending.
  std::vector<std::size_t> kept;
  std::vector<ClusterSummary> clusters;
  std::size_t effective_k = 0;
  double inertia = 0.0;
  std::size_t unreconstructable = 0;

  double retention() const;
};

/// Clusters the gold-side embeddings and prunes each cluster. Row i of
/// `gold_embeddings` belongs to scored[i].
FilterResult filter_scored(const std::vector<ScoredPair>& scored,
                           const PointSet& gold_embeddings,
                           const FilterConfig& config);

/// The pseudo side through the opposite model: a pseudo response goes to the
/// backward model, a pseudo instruction to the forward model.
RenderedPrompt reconstruction_prompt(const PseudoPair& pair,
                                     const PromptRegistry& prompts);
GenerationOutcome reconstruct(const PseudoPair& pair,
                              const CycleHandles& handles, Client& client,
                              const PromptRegistry& prompts,
                              const GenerationParams& params);

/// Euclidean distance between the encodings of two texts.
double distance(const std::string& gold, const std::string& reconstruction,
                Client& client, const ModelHandle& encoder);

/// reconstruct -> embed -> cluster gold sides -> prune. Throws
/// ValidationError for an empty dataset.
FilterResult filter_dataset(const std::vector<PseudoPair>& pairs,
                            const CycleHandles& handles, Client& client,
                            const PromptRegistry& prompts,
                            const ModelHandle& encoder,
                            const FilterConfig& config);

std::vector<PseudoPair> select_kept(const std::vector<PseudoPair>& pairs,
                                    const FilterResult& result);

Json filter_summary(const FilterResult& result, const FilterConfig& config);

/// d_cycle.jsonl, filter_report.jsonl and filter_summary.json under `dir`.
void write_filter_outputs(const std::filesystem::path& dir,
                          const std::vector<PseudoPair>& pairs,
                          const FilterResult& result,
                          const FilterConfig& config);

}  // namespace cyclesynth
