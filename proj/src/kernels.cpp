// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <limits>
#include <string>

#include "cyclesynth/error.hpp"

namespace cyclesynth {

void PointSet::push_back(std::span<const double> values) {
  if (dim_ == 0 && data_.empty()) dim_ = values.size();
  if (values.size() != dim_ || dim_ == 0) {
    throw ValidationError("point has dimension " +
                          std::to_string(values.size()) + ", expected " +
                          std::to_string(dim_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
}

namespace kernels {

double squared_l2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

namespace {

inline void nearest_one(const PointSet& points, const PointSet& centroids,
                        std::size_t i, int& best, double& best_d) {
  best = 0;
  best_d = std::numeric_limits<double>::infinity();
  const auto p = points.row(i);
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_l2(p, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
}

void check_rows(std::size_t n, std::size_t a, std::size_t b) {
  if (a < n || b < n) throw ValidationError("kernel output span too small");
}

}  // namespace

void assign_nearest(const PointSet& points, const PointSet& centroids,
                    std::span<int> assignment, std::span<double> sq_dist,
                    KernelMode mode) {
  const std::size_t n = points.size();
  check_rows(n, assignment.size(), sq_dist.size());
  if (centroids.empty()) throw ValidationError("no centroids");
  if (centroids.dim() != points.dim()) {
    throw ValidationError("centroid dimension mismatch");
  }
  if (mode == KernelMode::serial) {
    for (std::size_t i = 0; i < n; ++i) {
      nearest_one(points, centroids, i, assignment[i], sq_dist[i]);
    }
    return;
  }
  const auto sn = static_cast<long>(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < sn; ++i) {
    const auto u = static_cast<std::size_t>(i);
    nearest_one(points, centroids, u, assignment[u], sq_dist[u]);
  }
}

void rowwise_l2(const PointSet& a, const PointSet& b, std::span<double> out,
                KernelMode mode) {
  const std::size_t n = a.size();
  if (b.size() != n || a.dim() != b.dim()) {
    throw ValidationError("rowwise_l2: shape mismatch");
  }
  check_rows(n, out.size(), out.size());
  if (mode == KernelMode::serial) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = std::sqrt(squared_l2(a.row(i), b.row(i)));
    }
    return;
  }
  const auto sn = static_cast<long>(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < sn; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out[u] = std::sqrt(squared_l2(a.row(u), b.row(u)));
  }
}

void relax_min_sq_dist(const PointSet& points, std::span<const double> center,
                       std::span<double> min_sq, KernelMode mode) {
  const std::size_t n = points.size();
  check_rows(n, min_sq.size(), min_sq.size());
  if (mode == KernelMode::serial) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = squared_l2(points.row(i), center);
      if (d < min_sq[i]) min_sq[i] = d;
    }
    return;
  }
  const auto sn = static_cast<long>(n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < sn; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double d = squared_l2(points.row(u), center);
    if (d < min_sq[u]) min_sq[u] = d;
  }
}

int parallel_threads() { return omp_get_max_threads(); }

}  // namespace kernels
}  // namespace cyclesynth
