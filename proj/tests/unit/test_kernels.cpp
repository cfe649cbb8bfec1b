// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>
#include <random>

#include "cyclesynth/error.hpp"
#include "cyclesynth/kernels.hpp"
#include "doctest.h"

using namespace cyclesynth;

namespace {

PointSet random_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  PointSet p(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& x : p.row(i)) x = d(gen);
  }
  return p;
}

template <class T>
bool bit_equal(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

}  // namespace

TEST_CASE("point set rows") {
  PointSet p(2);
  const double a[2] = {1.0, 2.0};
  p.push_back(a);
  CHECK(p.size() == 1);
  CHECK(p.row(0)[1] == 2.0);
  const double bad[3] = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(p.push_back(bad), ValidationError);
  CHECK(PointSet().size() == 0);
}

TEST_CASE("squared_l2 by hand") {
  const std::vector<double> a = {0.0, 3.0}, b = {4.0, 0.0};
  CHECK(kernels::squared_l2(a, b) == 25.0);
  CHECK(kernels::squared_l2(a, a) == 0.0);
}

TEST_CASE("assign_nearest breaks ties to the lowest centroid") {
  PointSet pts(1, 1);
  pts.row(0)[0] = 0.0;
  PointSet cents(2, 1);
  cents.row(0)[0] = 1.0;
  cents.row(1)[0] = -1.0;
  std::vector<int> a(1);
  std::vector<double> d(1);
  for (auto mode : {KernelMode::serial, KernelMode::parallel}) {
    kernels::assign_nearest(pts, cents, a, d, mode);
    CHECK(a[0] == 0);
    CHECK(d[0] == 1.0);
  }
}

TEST_CASE("parallel kernels are bit-identical to serial") {
  for (std::size_t n : {1u, 7u, 1000u, 4099u}) {
    const auto pts = random_points(n, 13, n);
    const auto other = random_points(n, 13, n + 1);
    const auto cents = random_points(37, 13, 99);

    std::vector<int> as(n), ap(n);
    std::vector<double> ds(n), dp(n);
    kernels::assign_nearest(pts, cents, as, ds, KernelMode::serial);
    kernels::assign_nearest(pts, cents, ap, dp, KernelMode::parallel);
    CHECK(as == ap);
    CHECK(bit_equal(ds, dp));

    std::vector<double> ls(n), lp(n);
    kernels::rowwise_l2(pts, other, ls, KernelMode::serial);
    kernels::rowwise_l2(pts, other, lp, KernelMode::parallel);
    CHECK(bit_equal(ls, lp));

    std::vector<double> ms(n, 1e300), mp(n, 1e300);
    for (std::size_t c = 0; c < 5; ++c) {
      kernels::relax_min_sq_dist(pts, cents.row(c), ms, KernelMode::serial);
      kernels::relax_min_sq_dist(pts, cents.row(c), mp, KernelMode::parallel);
    }
    CHECK(bit_equal(ms, mp));
  }
  CHECK(kernels::parallel_threads() >= 1);
}
