// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

// Straightforward k-center greedy: start at the best-reconstructed member,
// then repeatedly add the member farthest from everything chosen so far.
// Recomputes every distance each round.

#pragma once

#include <limits>
#include <string>
#include <vector>

namespace oracle {

struct KCenterItem {
  std::string id;
  double score;  // reconstruction distance
  std::vector<double> point;
};

inline double sq_dist(const std::vector<double>& a,
                      const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

inline bool prefer(const KCenterItem& a, const KCenterItem& b) {
  return a.score < b.score || (a.score == b.score && a.id < b.id);
}

inline std::vector<bool> kcenter_keep(const std::vector<KCenterItem>& items,
                                      std::size_t retain) {
  std::vector<bool> chosen(items.size(), false);
  std::size_t first = 0;
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (prefer(items[i], items[first])) first = i;
  }
  chosen[first] = true;
  for (std::size_t round = 1; round < retain; ++round) {
    int best = -1;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (chosen[i]) continue;
      double gap = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < items.size(); ++j) {
        if (chosen[j]) gap = std::min(gap, sq_dist(items[i].point, items[j].point));
      }
      if (best < 0 || gap > best_gap ||
          (gap == best_gap && prefer(items[i], items[best]))) {
        best = static_cast<int>(i);
        best_gap = gap;
      }
    }
    chosen[best] = true;
  }
  return chosen;
}

}  // namespace oracle
