// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cyclesynth/kernels.hpp"

namespace cyclesynth {

struct KMeansOptions {
  std::size_t k = 200;
  int max_iters = 100;
  std::uint64_t seed = 0;
  /// Independent k-means++ starts; the lowest-inertia run wins (earliest on
  /// ties).
  int restarts = 1;
  KernelMode mode = KernelMode::parallel;
};

struct ClusterModel {
  PointSet centroids;
  /// assignments[i] is the nearest centroid of point i (ties to the lowest
  /// index).
  std::vector<int> assignments;
  double inertia = 0.0;
  std::size_t effective_k = 0;
  int iterations = 0;
  bool converged = false;
};

/// Lloyd iterations from a seeded k-means++ start, until the assignment stops
/// changing or max_iters. Effective k is min(k, |points|). Empty clusters keep
/// their previous centroid. Deterministic for a given seed.
ClusterModel kmeans(const PointSet& points, const KMeansOptions& options);

/// Sum of squared distances of each point to its assigned centroid.
double inertia(const PointSet& points, const std::vector<int>& assignments,
               const PointSet& centroids);

}  // namespace cyclesynth
