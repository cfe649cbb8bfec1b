// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cyclesynth/error.hpp"
#include "cyclesynth/kmeans.hpp"

namespace cyclesynth {

const char* to_string(PruningMode mode) {
  return mode == PruningMode::distance_rank ? "distance_rank"
                                            : "kcenter_coverage";
}

PruningMode pruning_mode_from_string(std::string_view s) {
  if (s == "distance_rank") return PruningMode::distance_rank;
  if (s == "kcenter_coverage") return PruningMode::kcenter_coverage;
  throw ConfigError("unknown pruning mode: " + std::string(s));
}

void FilterConfig::validate() const {
  if (k_clusters == 0) throw ConfigError("filter.k_clusters must be positive");
  if (!(drop_fraction >= 0.0 && drop_fraction < 1.0)) {
    throw ConfigError("filter.drop_fraction must be in [0, 1)");
  }
  if (kmeans_max_iters < 0) {
    throw ConfigError("filter.kmeans_max_iters must be >= 0");
  }
  if (kmeans_restarts < 1) {
    throw ConfigError("filter.kmeans_restarts must be >= 1");
  }
}

Json to_json(const FilterConfig& c) {
  Json j;
  j["k_clusters"] = c.k_clusters;
  j["drop_fraction"] = c.drop_fraction;
  j["kmeans_max_iters"] = c.kmeans_max_iters;
  j["kmeans_restarts"] = c.kmeans_restarts;
  j["rng_seed"] = c.rng_seed;
  j["pruning_mode"] = to_string(c.pruning_mode);
  j["joint_clustering"] = c.joint_clustering;
  j["kernel_mode"] = c.kernel_mode == KernelMode::serial ? "serial" : "parallel";
  return j;
}

FilterConfig filter_config_from_json(const Json& j) {
  FilterConfig c;
  c.k_clusters = j.value("k_clusters", c.k_clusters);
  c.drop_fraction = j.value("drop_fraction", c.drop_fraction);
  c.kmeans_max_iters = j.value("kmeans_max_iters", c.kmeans_max_iters);
  c.kmeans_restarts = j.value("kmeans_restarts", c.kmeans_restarts);
  c.rng_seed = j.value("rng_seed", c.rng_seed);
  if (j.contains("pruning_mode")) {
    c.pruning_mode =
        pruning_mode_from_string(j["pruning_mode"].get<std::string>());
  }
  c.joint_clustering = j.value("joint_clustering", c.joint_clustering);
  if (j.contains("kernel_mode")) {
    const auto m = j["kernel_mode"].get<std::string>();
    if (m == "serial") {
      c.kernel_mode = KernelMode::serial;
    } else if (m == "parallel") {
      c.kernel_mode = KernelMode::parallel;
    } else {
      throw ConfigError("unknown kernel_mode: " + m);
    }
  }
  return c;
}

Json to_json(const FilterVerdict& v) {
  Json j;
  j["pair_id"] = v.pair_id;
  j["gold_side"] = to_string(v.gold_side);
  j["reconstruction"] = v.reconstruction ? Json(*v.reconstruction) : Json();
  j["distance"] = v.distance ? Json(*v.distance) : Json();
  j["cluster_id"] = v.cluster_id;
  j["kept"] = v.kept;
  j["reason"] = v.reason;
  return j;
}

std::size_t drop_count(std::size_t size, double fraction) {
  if (size == 0) return 0;
  // The epsilon absorbs products such as 0.29 * 100 landing just below an
  // integer.
  const auto raw = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(size) + 1e-9));
  return std::min(raw, size - 1);
}

namespace {

std::vector<bool> prune_by_distance(const std::vector<ClusterMember>& members,
                                    std::size_t drop) {
  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (members[a].distance != members[b].distance) {
      return members[a].distance > members[b].distance;
    }
    return members[a].pair_id > members[b].pair_id;
  });
  std::vector<bool> keep(members.size(), true);
  for (std::size_t i = 0; i < drop; ++i) keep[order[i]] = false;
  return keep;
}

// True when a should be preferred over b: lower distance, then lower id.
bool better_reconstructed(const ClusterMember& a, const ClusterMember& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.pair_id < b.pair_id;
}

std::vector<bool> prune_by_coverage(const std::vector<ClusterMember>& members,
                                    std::size_t retain) {
  const std::size_t n = members.size();
  std::vector<bool> keep(n, false);
  std::size_t seed = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (better_reconstructed(members[i], members[seed])) seed = i;
  }
  keep[seed] = true;
  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
  auto relax = [&](std::size_t c) {
    for (std::size_t i = 0; i < n; ++i) {
      min_sq[i] = std::min(
          min_sq[i], kernels::squared_l2(members[i].embedding,
                                         members[c].embedding));
    }
  };
  relax(seed);
  for (std::size_t chosen = 1; chosen < retain; ++chosen) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (keep[i]) continue;
      if (pick == n || min_sq[i] > min_sq[pick] ||
          (min_sq[i] == min_sq[pick] &&
           better_reconstructed(members[i], members[pick]))) {
        pick = i;
      }
    }
    keep[pick] = true;
    relax(pick);
  }
  return keep;
}

}  // namespace

std::vector<bool> prune_cluster(const std::vector<ClusterMember>& members,
                                std::size_t cluster_size,
                                const FilterConfig& config) {
  if (members.empty()) throw ValidationError("prune_cluster: empty cluster");
  if (cluster_size < members.size()) {
    throw ValidationError("prune_cluster: cluster smaller than member list");
  }
  const std::size_t drop =
      std::min(drop_count(cluster_size, config.drop_fraction),
               members.size() - 1);
  if (config.pruning_mode == PruningMode::distance_rank) {
    return prune_by_distance(members, drop);
  }
  return prune_by_coverage(members, members.size() - drop);
}

std::vector<bool> prune_cluster(const std::vector<ClusterMember>& members,
                                const FilterConfig& config) {
  return prune_cluster(members, members.size(), config);
}

double FilterResult::retention() const {
  if (verdicts.empty()) return 0.0;
  return static_cast<double>(kept.size()) /
         static_cast<double>(verdicts.size());
}

namespace {

// Cluster ids per input row and the total effective k.
std::pair<std::vector<int>, std::size_t> assign_clusters(
    const std::vector<ScoredPair>& scored, const PointSet& emb,
    const FilterConfig& config, double& inertia) {
  KMeansOptions opts;
  opts.k = config.k_clusters;
  opts.max_iters = config.kmeans_max_iters;
  opts.restarts = config.kmeans_restarts;
  opts.seed = config.rng_seed;
  opts.mode = config.kernel_mode;

  if (config.joint_clustering) {
    ClusterModel m = kmeans(emb, opts);
    inertia = m.inertia;
    return {std::move(m.assignments), m.effective_k};
  }

  std::vector<int> ids(scored.size(), 0);
  std::size_t offset = 0;
  inertia = 0.0;
  for (GoldSide side : {GoldSide::instruction, GoldSide::response}) {
    std::vector<std::size_t> rows;
    PointSet part(emb.dim());
    for (std::size_t i = 0; i < scored.size(); ++i) {
      if (scored[i].gold_side != side) continue;
      rows.push_back(i);
      part.push_back(emb.row(i));
    }
    if (rows.empty()) continue;
    ClusterModel m = kmeans(part, opts);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      ids[rows[r]] = m.assignments[r] + static_cast<int>(offset);
    }
    offset += m.effective_k;
    inertia += m.inertia;
  }
  return {std::move(ids), offset};
}

}  // namespace

FilterResult filter_scored(const std::vector<ScoredPair>& scored,
                           const PointSet& gold_embeddings,
                           const FilterConfig& config) {
  config.validate();
  if (scored.empty()) throw ValidationError("filter: empty dataset");
  if (gold_embeddings.size() != scored.size()) {
    throw ValidationError("filter: embedding count does not match pairs");
  }
  for (const auto& s : scored) {
    if (s.distance.has_value() != s.reconstruction.has_value()) {
      throw ValidationError("filter: pair " + s.pair_id +
                            " has a distance without a reconstruction");
    }
    if (s.distance && !(*s.distance >= 0.0)) {
      throw ValidationError("filter: negative distance for " + s.pair_id);
    }
  }

  FilterResult result;
  auto [ids, effective_k] =
      assign_clusters(scored, gold_embeddings, config, result.inertia);
  result.effective_k = effective_k;

  std::vector<std::vector<std::size_t>> by_cluster(effective_k);
  for (std::size_t i = 0; i < scored.size(); ++i) {
    by_cluster[static_cast<std::size_t>(ids[i])].push_back(i);
  }

  result.verdicts.resize(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    auto& v = result.verdicts[i];
    v.pair_id = scored[i].pair_id;
    v.gold_side = scored[i].gold_side;
    v.reconstruction = scored[i].reconstruction;
    v.distance = scored[i].distance;
    v.cluster_id = ids[i];
  }

  for (std::size_t c = 0; c < effective_k; ++c) {
    const auto& rows = by_cluster[c];
    ClusterSummary summary;
    summary.cluster_id = static_cast<int>(c);
    summary.size = rows.size();
    if (rows.empty()) {
      result.clusters.push_back(summary);
      continue;
    }
    std::vector<ClusterMember> members;
    std::vector<std::size_t> member_rows;
    for (std::size_t i : rows) {
      if (!scored[i].distance) {
        result.verdicts[i].kept = false;
        result.verdicts[i].reason = "unreconstructable";
        ++summary.unreconstructable;
        continue;
      }
      members.push_back(
          {scored[i].pair_id, *scored[i].distance, gold_embeddings.row(i)});
      member_rows.push_back(i);
    }
    if (!members.empty()) {
      const auto keep = prune_cluster(members, rows.size(), config);
      for (std::size_t m = 0; m < members.size(); ++m) {
        auto& v = result.verdicts[member_rows[m]];
        v.kept = keep[m];
        v.reason = keep[m] ? "kept" : "pruned";
        keep[m] ? ++summary.kept : ++summary.dropped;
      }
    }
    result.unreconstructable += summary.unreconstructable;
    result.clusters.push_back(summary);
  }

  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (result.verdicts[i].kept) result.kept.push_back(i);
  }
  return result;
}

RenderedPrompt reconstruction_prompt(const PseudoPair& pair,
                                     const PromptRegistry& prompts) {
  const std::string pseudo = pair.pseudo_trimmed();
  if (pair.gold_side == GoldSide::instruction) {
    return prompts.render(TemplateId::pseudo_instruction, {{"output", pseudo}});
  }
  return prompts.render(TemplateId::pseudo_answer, {{"instruction", pseudo}});
}

GenerationOutcome reconstruct(const PseudoPair& pair,
                              const CycleHandles& handles, Client& client,
                              const PromptRegistry& prompts,
                              const GenerationParams& params) {
  const ModelHandle& model = pair.gold_side == GoldSide::instruction
                                 ? handles.backward
                                 : handles.forward;
  return client.generate(model, reconstruction_prompt(pair, prompts), params);
}

double distance(const std::string& gold, const std::string& reconstruction,
                Client& client, const ModelHandle& encoder) {
  const auto vecs = client.embed({gold, reconstruction}, encoder);
  return std::sqrt(kernels::squared_l2(vecs[0].values, vecs[1].values));
}

FilterResult filter_dataset(const std::vector<PseudoPair>& pairs,
                            const CycleHandles& handles, Client& client,
                            const PromptRegistry& prompts,
                            const ModelHandle& encoder,
                            const FilterConfig& config) {
  config.validate();
  if (pairs.empty()) throw ValidationError("filter: empty dataset");

  // Reconstruction, batched per model.
  std::vector<std::optional<std::string>> recon(pairs.size());
  for (GoldSide side : {GoldSide::instruction, GoldSide::response}) {
    std::vector<std::size_t> rows;
    std::vector<RenderedPrompt> batch;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].gold_side != side) continue;
      if (pairs[i].pseudo_trimmed().empty()) continue;  // unreconstructable
      rows.push_back(i);
      batch.push_back(reconstruction_prompt(pairs[i], prompts));
    }
    if (batch.empty()) continue;
    const ModelHandle& model =
        side == GoldSide::instruction ? handles.backward : handles.forward;
    const auto outcomes = client.generate_batch(model, batch, config.generation);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (outcomes[r].ok()) recon[rows[r]] = *outcomes[r].text;
    }
  }

  std::vector<std::string> gold_texts;
  gold_texts.reserve(pairs.size());
  for (const auto& p : pairs) gold_texts.push_back(p.gold_text());
  const auto gold_vecs = client.embed(gold_texts, encoder);

  std::vector<std::string> recon_texts;
  std::vector<std::size_t> recon_rows;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!recon[i]) continue;
    recon_texts.push_back(*recon[i]);
    recon_rows.push_back(i);
  }
  std::vector<EmbeddingVector> recon_vecs;
  if (!recon_texts.empty()) recon_vecs = client.embed(recon_texts, encoder);

  const std::size_t dim = gold_vecs.front().dim();
  PointSet gold_points(dim);
  for (const auto& v : gold_vecs) gold_points.push_back(v.values);

  std::vector<ScoredPair> scored(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    scored[i].pair_id = pairs[i].pair_id;
    scored[i].gold_side = pairs[i].gold_side;
  }
  for (std::size_t r = 0; r < recon_rows.size(); ++r) {
    const std::size_t i = recon_rows[r];
    if (recon_vecs[r].dim() != dim) {
      throw BackendError(BackendFailure::rejected,
                         "encoder returned vectors of differing width");
    }
    scored[i].reconstruction = recon[i];
    scored[i].distance =
        std::sqrt(kernels::squared_l2(gold_points.row(i), recon_vecs[r].values));
  }
  return filter_scored(scored, gold_points, config);
}

std::vector<PseudoPair> select_kept(const std::vector<PseudoPair>& pairs,
                                    const FilterResult& result) {
  std::vector<PseudoPair> out;
  out.reserve(result.kept.size());
  for (std::size_t i : result.kept) out.push_back(pairs.at(i));
  return out;
}

Json filter_summary(const FilterResult& result, const FilterConfig& config) {
  Json j;
  j["config"] = to_json(config);
  j["effective_k"] = result.effective_k;
  j["inertia"] = result.inertia;
  j["input_pairs"] = result.verdicts.size();
  j["kept_pairs"] = result.kept.size();
  j["unreconstructable"] = result.unreconstructable;
  j["retention"] = result.retention();
  Json clusters = Json::array();
  for (const auto& c : result.clusters) {
    Json cj;
    cj["cluster_id"] = c.cluster_id;
    cj["size"] = c.size;
    cj["unreconstructable"] = c.unreconstructable;
    cj["dropped"] = c.dropped;
    cj["kept"] = c.kept;
    cj["retention"] =
        c.size == 0 ? Json() : Json(static_cast<double>(c.kept) /
                                    static_cast<double>(c.size));
    clusters.push_back(std::move(cj));
  }
  j["clusters"] = std::move(clusters);
  return j;
}

void write_filter_outputs(const std::filesystem::path& dir,
                          const std::vector<PseudoPair>& pairs,
                          const FilterResult& result,
                          const FilterConfig& config) {
  std::filesystem::create_directories(dir);
  write_dataset(dir / "d_cycle.jsonl", select_kept(pairs, result));
  std::vector<Json> rows;
  rows.reserve(result.verdicts.size());
  for (const auto& v : result.verdicts) rows.push_back(to_json(v));
  jsonl::write(dir / "filter_report.jsonl", rows);
  jsonl::write_json(dir / "filter_summary.json", filter_summary(result, config));
}

}  // namespace cyclesynth
