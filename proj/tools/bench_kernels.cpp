// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

// Serial vs OpenMP timings for the clustering kernels.

#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <vector>

#include "CLI11.hpp"
#include "cyclesynth/kernels.hpp"
#include "cyclesynth/kmeans.hpp"
#include "cyclesynth/random.hpp"

using namespace cyclesynth;

namespace {

PointSet random_points(std::size_t n, std::size_t dim, Rng& rng) {
  PointSet p(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : p.row(i)) v = rng.uniform01();
  }
  return p;
}

double best_ms(int reps, const std::function<void()>& fn) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(
        best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-16s serial %10.3f ms  parallel %10.3f ms  speedup %5.2fx\n",
              name, serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel benchmark"};
  std::size_t n = 10000, dim = 64, k = 200;
  int reps = 5;
  app.add_option("--n", n, "points");
  app.add_option("--dim", dim, "dimensions");
  app.add_option("--k", k, "centroids");
  app.add_option("--reps", reps, "repetitions (best is reported)");
  CLI11_PARSE(app, argc, argv);

  Rng rng(7);
  const PointSet points = random_points(n, dim, rng);
  const PointSet other = random_points(n, dim, rng);
  const PointSet centroids = random_points(k, dim, rng);
  std::printf("n=%zu dim=%zu k=%zu threads=%d\n", n, dim, k,
              kernels::parallel_threads());

  std::vector<int> assign(n);
  std::vector<double> sq(n);
  auto assign_in = [&](KernelMode m) {
    return [&, m] { kernels::assign_nearest(points, centroids, assign, sq, m); };
  };
  report("assign_nearest", best_ms(reps, assign_in(KernelMode::serial)),
         best_ms(reps, assign_in(KernelMode::parallel)));

  std::vector<double> out(n);
  auto rowwise_in = [&](KernelMode m) {
    return [&, m] { kernels::rowwise_l2(points, other, out, m); };
  };
  report("rowwise_l2", best_ms(reps, rowwise_in(KernelMode::serial)),
         best_ms(reps, rowwise_in(KernelMode::parallel)));

  std::vector<double> min_sq(n);
  auto relax_in = [&](KernelMode m) {
    return [&, m] {
      std::fill(min_sq.begin(), min_sq.end(),
                std::numeric_limits<double>::infinity());
      for (std::size_t c = 0; c < 16; ++c) {
        kernels::relax_min_sq_dist(points, centroids.row(c), min_sq, m);
      }
    };
  };
  report("relax_min_sq x16", best_ms(reps, relax_in(KernelMode::serial)),
         best_ms(reps, relax_in(KernelMode::parallel)));

  auto kmeans_in = [&](KernelMode m) {
    return [&, m] {
      KMeansOptions o;
      o.k = k;
      o.seed = 1;
      o.mode = m;
      kmeans(points, o);
    };
  };
  const int kmeans_reps = std::max(1, reps / 2);
  report("kmeans", best_ms(kmeans_reps, kmeans_in(KernelMode::serial)),
         best_ms(kmeans_reps, kmeans_in(KernelMode::parallel)));
  return 0;
}
