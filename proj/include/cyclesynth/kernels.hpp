// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cyclesynth {

/// Dense row-major point matrix.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}
  PointSet(std::size_t rows, std::size_t dim)
      : dim_(dim), data_(rows * dim, 0.0) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return size() == 0; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

  /// Throws ValidationError when the row width does not match.
  void push_back(std::span<const double> values);

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Serial kernels are the reference; parallel kernels must produce
/// bit-identical results (each output element is computed by the same scalar
/// code, only the loop over elements is distributed).
enum class KernelMode { serial, parallel };

namespace kernels {

double squared_l2(std::span<const double> a, std::span<const double> b);

/// Nearest centroid per point, ties to the lowest centroid index.
void assign_nearest(const PointSet& points, const PointSet& centroids,
                    std::span<int> assignment, std::span<double> sq_dist,
                    KernelMode mode);

/// out[i] = ||a_i - b_i||_2
void rowwise_l2(const PointSet& a, const PointSet& b, std::span<double> out,
                KernelMode mode);

/// min_sq[i] = min(min_sq[i], ||p_i - center||^2)
void relax_min_sq_dist(const PointSet& points, std::span<const double> center,
                       std::span<double> min_sq, KernelMode mode);

/// Number of threads the parallel kernels use.
int parallel_threads();

}  // namespace kernels
}  // namespace cyclesynth
