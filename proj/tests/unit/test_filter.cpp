// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "cyclesynth/error.hpp"
#include "cyclesynth/filter.hpp"
#include "cyclesynth/mock_backend.hpp"
#include "doctest.h"
#include "oracles/bigram_oracle.hpp"
#include "oracles/kcenter_oracle.hpp"
#include "support.hpp"

using namespace cyclesynth;
using testing_support::prompts;

namespace {

const ModelHandle kEncoder{"enc", ModelRole::encoder, {}};
const CycleHandles kHandles{{"m", ModelRole::forward, {}},
                            {"m", ModelRole::backward, {}}};

std::vector<ClusterMember> members_of(const std::vector<double>& dist,
                                      const PointSet& pts) {
  std::vector<ClusterMember> out;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "p%03zu", i);
    out.push_back({id, dist[i], pts.row(i)});
  }
  return out;
}

std::size_t count_true(const std::vector<bool>& v) {
  return static_cast<std::size_t>(std::count(v.begin(), v.end(), true));
}

}  // namespace

TEST_CASE("drop count floors and leaves a survivor") {
  CHECK(drop_count(20, 0.05) == 1);
  CHECK(drop_count(10, 0.05) == 0);
  CHECK(drop_count(40, 0.05) == 2);
  CHECK(drop_count(100, 0.05) == 5);
  CHECK(drop_count(1, 0.5) == 0);
  CHECK(drop_count(4, 0.99) == 3);
  CHECK(drop_count(0, 0.05) == 0);
}

TEST_CASE("distance rank drops the farthest, ties to the larger id") {
  PointSet pts(4, 1);
  FilterConfig cfg;
  cfg.drop_fraction = 0.5;
  // Two members tie at the largest distance; with budget 2 both go.
  auto keep = prune_cluster(members_of({1.0, 3.0, 3.0, 2.0}, pts), cfg);
  CHECK(keep == std::vector<bool>{true, false, false, true});
  // Budget 1: the tie breaks toward the larger pair id.
  cfg.drop_fraction = 0.25;
  keep = prune_cluster(members_of({1.0, 3.0, 3.0, 2.0}, pts), cfg);
  CHECK(keep == std::vector<bool>{true, true, false, true});
}

TEST_CASE("the budget counts unreconstructable members but never empties") {
  PointSet pts(2, 1);
  FilterConfig cfg;
  cfg.drop_fraction = 0.5;
  const auto m = members_of({1.0, 2.0}, pts);
  CHECK(count_true(prune_cluster(m, 2, cfg)) == 1);
  CHECK(count_true(prune_cluster(m, 10, cfg)) == 1);
  CHECK_THROWS_AS(prune_cluster(m, 1, cfg), ValidationError);
  CHECK_THROWS_AS(prune_cluster({}, 3, cfg), ValidationError);
}

TEST_CASE("k-center pruning matches the reference greedy") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> size_dist(1, 10);
  std::uniform_int_distribution<int> score_dist(0, 3);  // forces ties
  FilterConfig cfg;
  cfg.pruning_mode = PruningMode::kcenter_coverage;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = static_cast<std::size_t>(size_dist(gen));
    cfg.drop_fraction = u(gen) * 0.9;
    PointSet pts(n, 3);
    std::vector<double> dist(n);
    std::vector<oracle::KCenterItem> items;
    for (std::size_t i = 0; i < n; ++i) {
      for (double& x : pts.row(i)) x = std::round(u(gen) * 4.0);
      dist[i] = score_dist(gen);
    }
    const auto members = members_of(dist, pts);
    for (const auto& m : members) {
      items.push_back({m.pair_id, m.distance,
                       std::vector<double>(m.embedding.begin(), m.embedding.end())});
    }
    const auto keep = prune_cluster(members, cfg);
    const std::size_t retain = n - drop_count(n, cfg.drop_fraction);
    CHECK(count_true(keep) == retain);
    CHECK(keep == oracle::kcenter_keep(items, retain));
  }
}

TEST_CASE("pruning is monotone in reconstruction distance") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FilterConfig cfg;
  cfg.drop_fraction = 0.2;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 5 + trial % 30;
    PointSet pts(n, 2);
    std::vector<double> dist(n);
    for (auto& d : dist) d = u(gen);
    const auto keep = prune_cluster(members_of(dist, pts), cfg);
    double max_kept = -1.0, min_dropped = 2.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (keep[i]) max_kept = std::max(max_kept, dist[i]);
      else min_dropped = std::min(min_dropped, dist[i]);
    }
    CHECK(max_kept <= min_dropped);
    CHECK(count_true(keep) == n - drop_count(n, 0.2));
  }
}

TEST_CASE("filter_scored keeps floor-bounded shares per cluster") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredPair> scored;
  PointSet emb(2);
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 25; ++i) {
      const double p[2] = {10.0 * c + noise(gen), noise(gen)};
      emb.push_back(p);
      ScoredPair s;
      s.pair_id = "c" + std::to_string(c) + "-" + std::to_string(i);
      s.distance = u(gen);
      s.reconstruction = "r";
      scored.push_back(s);
    }
  }
  scored[3].distance.reset();
  scored[3].reconstruction.reset();
  FilterConfig cfg;
  cfg.k_clusters = 4;
  cfg.kmeans_restarts = 3;
  const auto res = filter_scored(scored, emb, cfg);
  CHECK(res.effective_k == 4);
  CHECK(res.unreconstructable == 1);
  CHECK_FALSE(res.verdicts[3].kept);
  CHECK(res.verdicts[3].reason == "unreconstructable");
  std::size_t total_dropped = 0;
  for (const auto& c : res.clusters) {
    CHECK(c.size == 25);
    CHECK(c.dropped == drop_count(c.size, 0.05));
    CHECK(c.kept + c.dropped + c.unreconstructable == c.size);
    total_dropped += c.dropped;
  }
  CHECK(res.kept.size() == 100 - 1 - total_dropped);
  CHECK(std::is_sorted(res.kept.begin(), res.kept.end()));
  CHECK(res.retention() == doctest::Approx(res.kept.size() / 100.0));
  // Same seed, same result.
  const auto again = filter_scored(scored, emb, cfg);
  CHECK(again.kept == res.kept);
}

TEST_CASE("per-side clustering offsets response-gold cluster ids") {
  std::vector<ScoredPair> scored;
  PointSet emb(1);
  for (int i = 0; i < 6; ++i) {
    ScoredPair s;
    s.pair_id = "p" + std::to_string(i);
    s.gold_side = i < 3 ? GoldSide::instruction : GoldSide::response;
    s.distance = 0.0;
    s.reconstruction = "x";
    scored.push_back(s);
    const double v = i;
    emb.push_back(std::span<const double>(&v, 1));
  }
  FilterConfig cfg;
  cfg.k_clusters = 2;
  cfg.joint_clustering = false;
  const auto res = filter_scored(scored, emb, cfg);
  CHECK(res.effective_k == 4);
  for (int i = 0; i < 3; ++i) CHECK(res.verdicts[i].cluster_id < 2);
  for (int i = 3; i < 6; ++i) CHECK(res.verdicts[i].cluster_id >= 2);
}

TEST_CASE("mock distances agree with the bigram oracle") {
  MockBackend mock;
  Client client(mock);
  CHECK(distance("ab", "ba", client, kEncoder) ==
        doctest::Approx(oracle::distance("ab", "ba", 256)));
  CHECK(distance("ab", "ab", client, kEncoder) == 0.0);
  // One bigram each in different buckets.
  CHECK(distance("ab", "cd", client, kEncoder) == doctest::Approx(std::sqrt(2.0)));
  CHECK(distance("héllo wörld", "hello world", client, kEncoder) ==
        doctest::Approx(oracle::distance("héllo wörld", "hello world", 256)));
}

TEST_CASE("mock filter: instruction-gold pairs reconstruct exactly") {
  MockBackend mock;
  Client client(mock);
  std::vector<PseudoPair> pairs;
  for (int i = 0; i < 6; ++i) {
    const std::string q = "Qr[question " + std::to_string(i) + "?]";
    pairs.push_back({"q:" + std::to_string(i), q, MockBackend::forward_rule(q),
                     GoldSide::instruction, 1, PairDirection::q_to_a,
                     std::to_string(i)});
    const std::string a = "Ar[answer " + std::to_string(i) + ".]";
    pairs.push_back({"a:" + std::to_string(i), MockBackend::backward_rule(a), a,
                     GoldSide::response, 1, PairDirection::a_to_q,
                     std::to_string(i)});
  }
  FilterConfig cfg;
  const auto res = filter_dataset(pairs, kHandles, client, prompts(), kEncoder, cfg);
  REQUIRE(res.verdicts.size() == pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& v = res.verdicts[i];
    REQUIRE(v.distance.has_value());
    if (pairs[i].gold_side == GoldSide::instruction) {
      CHECK(*v.reconstruction == pairs[i].instruction);
      CHECK(*v.distance == 0.0);
    } else {
      CHECK(*v.reconstruction == MockBackend::forward_rule(pairs[i].instruction));
      CHECK(*v.distance ==
            doctest::Approx(oracle::distance(pairs[i].response, *v.reconstruction, 256)));
    }
  }
  // Every cluster has fewer than 20 members, so nothing is dropped.
  CHECK(res.kept.size() == pairs.size());
  CHECK(select_kept(pairs, res).size() == pairs.size());

  testing_support::TempDir dir;
  write_filter_outputs(dir.path(), pairs, res, cfg);
  CHECK(read_pairs(dir / "d_cycle.jsonl").size() == pairs.size());
  CHECK(jsonl::read(dir / "filter_report.jsonl").size() == pairs.size());
  const auto summary = jsonl::read_json(dir / "filter_summary.json");
  CHECK(summary["kept_pairs"] == pairs.size());
}

TEST_CASE("failed reconstructions are excluded from pruning") {
  MockOptions mo;
  mo.fail_substrings = {"BROKEN"};
  MockBackend mock(mo);
  ClientOptions co;
  co.retry.base_delay = std::chrono::milliseconds(0);
  Client client(mock, co);
  std::vector<PseudoPair> pairs = {
      {"q:0", "Qr[ok?]", "A[Qr[ok?]]", GoldSide::instruction, 1,
       PairDirection::q_to_a, "0"},
      {"q:1", "Qr[x?]", "A[BROKEN]", GoldSide::instruction, 1,
       PairDirection::q_to_a, "1"},
      {"q:2", "Qr[y?]", "   ", GoldSide::instruction, 1, PairDirection::q_to_a, "2"}};
  const auto res =
      filter_dataset(pairs, kHandles, client, prompts(), kEncoder, FilterConfig{});
  CHECK(res.unreconstructable == 2);
  CHECK(res.kept == std::vector<std::size_t>{0});
  CHECK(res.verdicts[1].reason == "unreconstructable");
  CHECK(res.verdicts[2].reason == "unreconstructable");
  CHECK_FALSE(res.verdicts[2].distance.has_value());
}

TEST_CASE("a single pair survives filtering") {
  MockBackend mock;
  Client client(mock);
  const std::vector<PseudoPair> pairs = {{"q:0", "Qr[a?]", "A[Qr[a?]]",
                                          GoldSide::instruction, 1,
                                          PairDirection::q_to_a, "0"}};
  FilterConfig cfg;
  cfg.drop_fraction = 0.9;
  const auto res = filter_dataset(pairs, kHandles, client, prompts(), kEncoder, cfg);
  CHECK(res.effective_k == 1);
  CHECK(res.kept.size() == 1);
  CHECK_THROWS_AS(filter_dataset({}, kHandles, client, prompts(), kEncoder, cfg),
                  ValidationError);
}

TEST_CASE("filter config validation and round trip") {
  FilterConfig cfg;
  cfg.pruning_mode = PruningMode::kcenter_coverage;
  cfg.k_clusters = 7;
  const auto back = filter_config_from_json(to_json(cfg));
  CHECK(back.k_clusters == 7);
  CHECK(back.pruning_mode == PruningMode::kcenter_coverage);
  for (double f : {-0.1, 1.0, 1.5}) {
    FilterConfig bad;
    bad.drop_fraction = f;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }
  FilterConfig bad;
  bad.k_clusters = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(pruning_mode_from_string("nope"), ConfigError);
}
