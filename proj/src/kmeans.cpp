// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/kmeans.hpp"

#include <algorithm>
#include <limits>

#include "cyclesynth/error.hpp"
#include "cyclesynth/random.hpp"

namespace cyclesynth {

namespace {

PointSet seed_plus_plus(const PointSet& points, std::size_t k, Rng& rng,
                        KernelMode mode) {
  const std::size_t n = points.size();
  PointSet centers(points.dim());
  centers.push_back(points.row(rng.uniform_index(n)));

  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
  kernels::relax_min_sq_dist(points, centers.row(0), min_sq, mode);

  while (centers.size() < k) {
    double total = 0.0;
    for (double d : min_sq) total += d;

    std::size_t pick = n;
    if (total > 0.0) {
      const double r = rng.uniform01() * total;
      double cum = 0.0;
      std::size_t last_positive = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (min_sq[i] <= 0.0) continue;
        last_positive = i;
        cum += min_sq[i];
        if (cum > r) {
          pick = i;
          break;
        }
      }
      if (pick == n) pick = last_positive;
    } else {
      // Every point already coincides with a center.
      pick = rng.uniform_index(n);
    }
    centers.push_back(points.row(pick));
    kernels::relax_min_sq_dist(points, centers.row(centers.size() - 1), min_sq,
                               mode);
  }
  return centers;
}

void update_centroids(const PointSet& points, const std::vector<int>& assign,
                      PointSet& centroids) {
  const std::size_t k = centroids.size();
  const std::size_t dim = points.dim();
  std::vector<double> sums(k * dim, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto c = static_cast<std::size_t>(assign[i]);
    ++counts[c];
    const auto p = points.row(i);
    for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += p[d];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    auto row = centroids.row(c);
    const double inv = 1.0 / static_cast<double>(counts[c]);
    for (std::size_t d = 0; d < dim; ++d) row[d] = sums[c * dim + d] * inv;
  }
}

ClusterModel run_once(const PointSet& points, std::size_t k, int max_iters,
                      Rng& rng, KernelMode mode) {
  const std::size_t n = points.size();
  ClusterModel model;
  model.effective_k = k;
  model.centroids = seed_plus_plus(points, k, rng, mode);
  model.assignments.assign(n, 0);
  std::vector<double> sq(n, 0.0);
  kernels::assign_nearest(points, model.centroids, model.assignments, sq, mode);

  std::vector<int> next(n, 0);
  for (int it = 1; it <= max_iters; ++it) {
    model.iterations = it;
    update_centroids(points, model.assignments, model.centroids);
    kernels::assign_nearest(points, model.centroids, next, sq, mode);
    if (next == model.assignments) {
      model.converged = true;
      break;
    }
    model.assignments.swap(next);
  }
  double total = 0.0;
  for (double d : sq) total += d;
  model.inertia = total;
  return model;
}

}  // namespace

ClusterModel kmeans(const PointSet& points, const KMeansOptions& options) {
  if (points.empty()) throw ValidationError("kmeans: no points");
  if (options.k == 0) throw ValidationError("kmeans: k must be positive");
  if (options.max_iters < 0) throw ValidationError("kmeans: max_iters < 0");
  const std::size_t k = std::min(options.k, points.size());

  Rng rng(options.seed);
  ClusterModel best;
  bool have = false;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    ClusterModel m = run_once(points, k, options.max_iters, rng, options.mode);
    if (!have || m.inertia < best.inertia) {
      best = std::move(m);
      have = true;
    }
  }
  return best;
}

double inertia(const PointSet& points, const std::vector<int>& assignments,
               const PointSet& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    total += kernels::squared_l2(
        points.row(i), centroids.row(static_cast<std::size_t>(assignments[i])));
  }
  return total;
}

}  // namespace cyclesynth
