// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace cyclesynth::stats {

/// I_x(a, b) for a, b > 0 and x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

/// P(T <= t) for Student's t with `df` degrees of freedom (df > 0).
double student_t_cdf(double t, double df);

/// P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;
  double t = 0.0;
  std::size_t n = 0;
};

/// Sample correlation with a two-sided t-test on n - 2 degrees of freedom.
/// Throws ValidationError for mismatched lengths, n < 3, non-finite values or
/// a constant input.
PearsonResult pearson(const std::vector<double>& x,
                      const std::vector<double>& y);

}  // namespace cyclesynth::stats
