// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/evalkit.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cyclesynth/error.hpp"
#include "cyclesynth/random.hpp"
#include "cyclesynth/text.hpp"

namespace cyclesynth {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::optional<double> parse_judge_score(std::string_view reply) {
  std::size_t i = 0;
  while (i < reply.size()) {
    if (is_digit(reply[i])) break;
    if (reply[i] == '.' && i + 1 < reply.size() && is_digit(reply[i + 1])) {
      break;
    }
    ++i;
  }
  if (i == reply.size()) return std::nullopt;
  if (i > 0 && (reply[i - 1] == '-' || reply[i - 1] == '+')) {
    return std::nullopt;
  }
  std::size_t j = i;
  while (j < reply.size() && is_digit(reply[j])) ++j;
  if (j + 1 < reply.size() && reply[j] == '.' && is_digit(reply[j + 1])) {
    ++j;
    while (j < reply.size() && is_digit(reply[j])) ++j;
  }
  double value = 0.0;
  std::from_chars(reply.data() + i, reply.data() + j, value);
  if (!(value >= 0.0 && value <= 10.0)) return std::nullopt;
  return value;
}

Json to_json(const JudgeScore& s) {
  Json j;
  j["pair_id"] = s.pair_id;
  j["score"] = s.score ? Json(*s.score) : Json();
  j["raw_reply"] = s.raw_reply;
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

JudgeRun judge_pairs(const std::vector<PseudoPair>& pairs,
                     const ModelHandle& judge, Client& client,
                     const PromptRegistry& prompts, const JudgeConfig& config) {
  if (pairs.empty()) throw ValidationError("judge: no pairs");
  if (config.sample_n == 0) throw ValidationError("judge: sample_n is 0");

  Rng rng(config.rng_seed);
  auto idx = rng.sample_without_replacement(pairs.size(), config.sample_n);
  std::sort(idx.begin(), idx.end());

  std::vector<RenderedPrompt> rendered;
  rendered.reserve(idx.size());
  for (std::size_t i : idx) {
    rendered.push_back(
        prompts.render(TemplateId::qa_judge, {{"question", pairs[i].instruction},
                                              {"answer", pairs[i].response}}));
  }
  const auto outcomes = client.generate_batch(judge, rendered, config.generation);

  JudgeRun run;
  run.sampled = idx.size();
  double sum = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    JudgeScore s;
    s.pair_id = pairs[idx[k]].pair_id;
    if (!outcomes[k].ok()) {
      s.error = outcomes[k].failure ? to_string(*outcomes[k].failure)
                                    : std::string("generation_failure");
      ++run.failed;
    } else {
      s.raw_reply = *outcomes[k].text;
      s.score = parse_judge_score(s.raw_reply);
      if (s.score) {
        sum += *s.score;
        ++run.parsed;
      } else {
        s.error = "unparsable";
        ++run.failed;
      }
    }
    run.scores.push_back(std::move(s));
  }
  if (run.parsed > 0) run.mean = sum / static_cast<double>(run.parsed);
  run.flagged = static_cast<double>(run.failed) >
                config.max_failure_share * static_cast<double>(run.sampled);
  return run;
}

void write_judge_scores(const std::filesystem::path& path, const JudgeRun& run) {
  std::vector<Json> rows;
  rows.reserve(run.scores.size());
  for (const auto& s : run.scores) rows.push_back(to_json(s));
  jsonl::write(path, rows);
}

Json judge_summary(const JudgeRun& run, const JudgeConfig& config) {
  Json j;
  j["sample_n"] = config.sample_n;
  j["rng_seed"] = config.rng_seed;
  j["sampled"] = run.sampled;
  j["parsed"] = run.parsed;
  j["failed"] = run.failed;
  j["mean"] = run.mean ? Json(*run.mean) : Json();
  j["flagged"] = run.flagged;
  return j;
}

ScoreTable read_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scores file " + path.string());
  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.emplace_back(text::trim(cell));
    if (cells.size() != 3) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected method,metric,value");
    }
    if (line_no == 1 && cells[0] == "method") continue;
    double value = 0.0;
    const char* first = cells[2].data();
    const char* last = first + cells[2].size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": bad value '" + cells[2] + "'");
    }
    auto [it, inserted] = table[cells[0]].emplace(cells[1], value);
    if (!inserted) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": duplicate " + cells[0] + "/" + cells[1]);
    }
  }
  return table;
}

std::vector<std::string> canonical_method_order(
    const std::vector<std::string>& methods) {
  static const std::vector<std::string> kKnown = {
      "rand-5", "rand-10", "rand-20", "clust-5",
      "clust-10", "clust-20", "cycle-inst"};
  std::vector<std::string> out;
  for (const auto& m : kKnown) {
    if (std::find(methods.begin(), methods.end(), m) != methods.end()) {
      out.push_back(m);
    }
  }
  std::vector<std::string> rest;
  for (const auto& m : methods) {
    if (std::find(kKnown.begin(), kKnown.end(), m) == kKnown.end()) {
      rest.push_back(m);
    }
  }
  std::sort(rest.begin(), rest.end());
  rest.erase(std::unique(rest.begin(), rest.end()), rest.end());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

CorrelationReport build_report(const std::map<std::string, double>& quality,
                               const std::map<std::string, double>& perf) {
  std::vector<std::string> keys;
  for (const auto& [k, v] : quality) {
    if (!perf.count(k)) {
      throw ValidationError("method " + k + " has no performance score");
    }
    keys.push_back(k);
  }
  for (const auto& [k, v] : perf) {
    if (!quality.count(k)) {
      throw ValidationError("method " + k + " has no quality score");
    }
  }
  CorrelationReport report;
  report.methods = canonical_method_order(keys);
  for (const auto& m : report.methods) {
    report.x.push_back(quality.at(m));
    report.y.push_back(perf.at(m));
  }
  report.result = stats::pearson(report.x, report.y);
  return report;
}

CorrelationReport build_report(const ScoreTable& table,
                               const std::string& x_metric,
                               const std::string& y_metric) {
  std::map<std::string, double> quality;
  std::map<std::string, double> perf;
  for (const auto& [method, metrics] : table) {
    const auto xi = metrics.find(x_metric);
    const auto yi = metrics.find(y_metric);
    if (xi != metrics.end()) quality[method] = xi->second;
    if (yi != metrics.end()) perf[method] = yi->second;
  }
  return build_report(quality, perf);
}

Json to_json(const CorrelationReport& r) {
  Json j;
  j["methods"] = r.methods;
  j["x"] = r.x;
  j["y"] = r.y;
  j["n"] = r.result.n;
  j["r"] = r.result.r;
  j["t"] = r.result.t;
  j["p"] = r.result.p;
  j["test"] = "two-sided t, df = n - 2";
  return j;
}

}  // namespace cyclesynth
