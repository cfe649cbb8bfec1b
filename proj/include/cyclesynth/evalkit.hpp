// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyclesynth/backend.hpp"
#include "cyclesynth/dataset.hpp"
#include "cyclesynth/prompts.hpp"
#include "cyclesynth/stats.hpp"

namespace cyclesynth {

/// First unsigned integer or decimal in `reply`, if it lies in [0, 10].
/// A number written with a leading sign is rejected.
std::optional<double> parse_judge_score(std::string_view reply);

struct JudgeScore {
  std::string pair_id;
  std::optional<double> score;
  std::string raw_reply;
  std::string error;  // empty when parsed
};

Json to_json(const JudgeScore& s);

struct JudgeConfig {
  std::size_t sample_n = 500;
  std::uint64_t rng_seed = 0;
  /// A run whose failure share exceeds this is flagged.
  double max_failure_share = 0.10;
  GenerationParams generation;
};

struct JudgeRun {
  std::vector<JudgeScore> scores;
  std::optional<double> mean;
  std::size_t sampled = 0;
  std::size_t parsed = 0;
  std::size_t failed = 0;
  bool flagged = false;
};

/// Scores a seeded sample (all pairs when there are fewer than sample_n),
/// in dataset order. Failed generations and unparsable replies are counted
/// and left out of the mean.
JudgeRun judge_pairs(const std::vector<PseudoPair>& pairs,
                     const ModelHandle& judge, Client& client,
                     const PromptRegistry& prompts, const JudgeConfig& config);

void write_judge_scores(const std::filesystem::path& path, const JudgeRun& run);
Json judge_summary(const JudgeRun& run, const JudgeConfig& config);

/// method -> metric -> value
using ScoreTable = std::map<std::string, std::map<std::string, double>>;

/// CSV with columns method,metric,value; an optional header row is skipped.
ScoreTable read_scores(const std::filesystem::path& path);

/// Known methods first in a fixed order, then any others by name.
std::vector<std::string> canonical_method_order(
    const std::vector<std::string>& methods);

struct CorrelationReport {
  std::vector<std::string> methods;
  std::vector<double> x;  // quality
  std::vector<double> y;  // downstream metric
  stats::PearsonResult result;
};

/// Throws ValidationError when the two maps do not share the same keys.
CorrelationReport build_report(const std::map<std::string, double>& quality,
                               const std::map<std::string, double>& perf);

/// Pulls `x_metric` and `y_metric` for every method carrying both.
CorrelationReport build_report(const ScoreTable& table,
                               const std::string& x_metric,
                               const std::string& y_metric);

Json to_json(const CorrelationReport& r);

}  // namespace cyclesynth
