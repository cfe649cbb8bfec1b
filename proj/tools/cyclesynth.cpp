// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cyclesynth/baselines.hpp"
#include "cyclesynth/config.hpp"
#include "cyclesynth/corpus.hpp"
#include "cyclesynth/cycle.hpp"
#include "cyclesynth/error.hpp"
#include "cyclesynth/evalkit.hpp"
#include "cyclesynth/filter.hpp"
#include "cyclesynth/pipeline.hpp"
#include "cyclesynth/reformat.hpp"

namespace fs = std::filesystem;
using namespace cyclesynth;

namespace {

struct CommonFlags {
  std::string config;
  std::string backend;
  std::string base_url;
  std::string trainer;
  std::string trainer_url;
  std::string templates;
  bool single_flight = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON config file");
    app->add_option("--backend", backend, "mock or http")
        ->check(CLI::IsMember({"mock", "http"}));
    app->add_option("--base-url", base_url, "generation/embedding endpoint");
    app->add_option("--trainer", trainer, "mock or http")
        ->check(CLI::IsMember({"mock", "http"}));
    app->add_option("--trainer-url", trainer_url, "training service endpoint");
    app->add_option("--templates", templates, "prompt template directory");
    app->add_flag("--single-flight", single_flight,
                  "one backend request at a time");
  }

  // File, then environment, then flags.
  RunConfig resolve() const {
    RunConfig c = load_config(config.empty() ? std::nullopt
                                             : std::optional<fs::path>(config));
    apply_env(c);
    if (!backend.empty()) c.backend.kind = backend;
    if (!base_url.empty()) c.backend.base_url = base_url;
    if (!trainer.empty()) c.trainer.kind = trainer;
    if (!trainer_url.empty()) c.trainer.endpoint = trainer_url;
    if (!templates.empty()) c.template_dir = templates;
    if (single_flight) c.backend.single_flight = true;
    if (c.template_dir.empty()) c.template_dir = PromptRegistry::default_dir();
    return c;
  }
};

void print_json(const Json& j) { std::cout << j.dump(2) << "\n"; }

int cmd_segment(const std::string& input, const std::string& out) {
  const auto docs = fs::is_directory(input)
                        ? load_documents_dir(input, fs::path(input).filename())
                        : load_documents_jsonl(input);
  const SegmentedCorpus seg = segment_corpus(docs);
  write_segmented(out, seg);
  print_json({{"documents", docs.size()},
              {"questions", seg.n_questions()},
              {"answers", seg.n_answers()}});
  return 0;
}

int cmd_reformat(const CommonFlags& flags, const std::string& segmented,
                 const std::string& out, std::string failures_path) {
  RunConfig c = flags.resolve();
  c.validate();
  auto backend = make_backend(c.backend);
  Client client(*backend, client_options(c.backend));
  const auto prompts = PromptRegistry::load(c.template_dir);
  const SegmentedCorpus seg = read_segmented(segmented);
  auto q = reformat_questions(seg, base_handle(c), client, prompts,
                              c.generation);
  auto a = reformat_answers(seg, base_handle(c), client, prompts, c.generation);
  std::vector<StageFailure> failures = std::move(q.failures);
  failures.insert(failures.end(), a.failures.begin(), a.failures.end());
  if (failures_path.empty()) {
    failures_path = (fs::path(out).parent_path() / "failures.jsonl").string();
  }
  write_standardized(out, {q.records, a.records});
  write_failures(failures_path, failures);
  print_json({{"instructions", q.records.size()},
              {"responses", a.records.size()},
              {"failures", failures.size()}});
  return 0;
}

int cmd_cycle(const CommonFlags& flags, const std::string& standardized,
              const std::string& out_dir, int iterations, bool continue_prev,
              const std::string& tag) {
  RunConfig c = flags.resolve();
  if (iterations != 0) c.cycle.iterations = iterations;
  if (continue_prev) c.cycle.continue_from_previous = true;
  c.validate();
  auto backend = make_backend(c.backend);
  auto trainer = make_trainer(c.trainer);
  Client client(*backend, client_options(c.backend));
  const auto prompts = PromptRegistry::load(c.template_dir);
  CycleEngine engine(client, *trainer, prompts, c.cycle, fs::path(out_dir),
                     tag);
  const auto result = engine.run(read_standardized(standardized),
                                 base_handle(c));
  Json jobs = Json::array();
  for (const auto& j : result.jobs) jobs.push_back(to_json(j));
  print_json({{"q_side", result.final.q_side},
              {"a_side", result.final.a_side},
              {"final_pairs", result.final.pairs.size()},
              {"failures", result.failures.size()},
              {"jobs", jobs}});
  return 0;
}

struct FilterFlags {
  std::string dataset;
  std::string handles;
  std::string out_dir;
  std::optional<std::size_t> k;
  std::optional<double> drop_fraction;
  std::string mode;
  std::optional<std::uint64_t> seed;
  bool per_side = false;
  bool serial = false;
};

int cmd_filter(const CommonFlags& flags, const FilterFlags& f) {
  RunConfig c = flags.resolve();
  if (f.k) c.filter.k_clusters = *f.k;
  if (f.drop_fraction) c.filter.drop_fraction = *f.drop_fraction;
  if (!f.mode.empty()) c.filter.pruning_mode = pruning_mode_from_string(f.mode);
  if (f.seed) c.filter.rng_seed = *f.seed;
  if (f.per_side) c.filter.joint_clustering = false;
  if (f.serial) c.filter.kernel_mode = KernelMode::serial;
  c.validate();
  auto backend = make_backend(c.backend);
  Client client(*backend, client_options(c.backend));
  const auto prompts = PromptRegistry::load(c.template_dir);
  const auto pairs = read_pairs(f.dataset);
  const auto handles = read_handles(f.handles);
  const auto result = filter_dataset(pairs, handles, client, prompts,
                                     encoder_handle(c), c.filter);
  write_filter_outputs(f.out_dir, pairs, result, c.filter);
  print_json({{"input_pairs", pairs.size()},
              {"kept_pairs", result.kept.size()},
              {"unreconstructable", result.unreconstructable},
              {"retention", result.retention()}});
  return 0;
}

int cmd_baseline(const CommonFlags& flags, const std::string& gold_path,
                 const std::string& method, double fraction,
                 std::uint64_t seed, const std::string& out_dir) {
  RunConfig c = flags.resolve();
  c.validate();
  auto backend = make_backend(c.backend);
  auto trainer = make_trainer(c.trainer);
  Client client(*backend, client_options(c.backend));
  const auto prompts = PromptRegistry::load(c.template_dir);
  BaselineConfig bc;
  bc.method = seed_method_from_string(method);
  bc.fraction = fraction;
  bc.rng_seed = seed;
  bc.generation = c.generation;
  bc.hyper = c.hyperparameters;
  const auto gold = read_gold_pairs(gold_path);
  char tag[64];
  std::snprintf(tag, sizeof tag, "%s-%s-%g", c.run_id.c_str(), method.c_str(),
                fraction * 100.0);
  const auto result = run_baseline(gold, bc, client, *trainer, prompts,
                                   encoder_handle(c), base_handle(c), out_dir,
                                   tag);
  print_json({{"gold_pairs", gold.size()},
              {"seed_pairs", result.seed.pairs.size()},
              {"bt_pairs", result.bt_pairs.size()},
              {"failures", result.failures.size()}});
  return 0;
}

int cmd_judge(const CommonFlags& flags, const std::string& dataset,
              const std::string& out, std::optional<std::size_t> sample_n,
              std::optional<std::uint64_t> seed, const std::string& summary) {
  RunConfig c = flags.resolve();
  if (sample_n) c.judge.sample_n = *sample_n;
  if (seed) c.judge.rng_seed = *seed;
  c.validate();
  auto backend = make_backend(c.backend);
  Client client(*backend, client_options(c.backend));
  const auto prompts = PromptRegistry::load(c.template_dir);
  const auto run = judge_pairs(read_pairs(dataset), judge_handle(c), client,
                               prompts, c.judge);
  write_judge_scores(out, run);
  const Json s = judge_summary(run, c.judge);
  if (!summary.empty()) jsonl::write_json(summary, s);
  print_json(s);
  return run.flagged ? 3 : 0;
}

int cmd_correlate(const std::string& scores, const std::string& x_metric,
                  const std::string& y_metric, const std::string& out) {
  const auto report = build_report(read_scores(scores), x_metric, y_metric);
  const Json j = to_json(report);
  if (!out.empty()) jsonl::write_json(out, j);
  print_json(j);
  return 0;
}

int cmd_run(const CommonFlags& flags, const std::string& input,
            const std::string& run_dir) {
  RunConfig c = flags.resolve();
  if (!input.empty()) c.input = input;
  Pipeline pipeline(c, run_dir);
  const RunManifest m = pipeline.run();
  print_json(m.counters);
  return 0;
}

int cmd_resume(const std::string& run_dir) {
  const RunManifest m = Pipeline::resume(run_dir);
  print_json(m.counters);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seed-free instruction data synthesis by cycle training"};
  app.require_subcommand(1);

  std::string input, out, out_dir, failures, dataset, handles, scores, summary;
  std::string run_dir, tag = "cycle", method = "random";
  std::string x_metric = "quality", y_metric = "avg";
  int iterations = 0;
  bool continue_prev = false;
  double fraction = 0.05;
  std::uint64_t seed = 0;
  std::optional<std::size_t> sample_n;
  std::optional<std::uint64_t> judge_seed;

  auto* seg = app.add_subcommand("segment", "split documents into passages");
  seg->add_option("--input", input, "documents JSONL or directory")->required();
  seg->add_option("--out", out, "segmented passages JSONL")->required();

  CommonFlags reformat_flags;
  auto* ref = app.add_subcommand("reformat", "standardize passages");
  reformat_flags.attach(ref);
  ref->add_option("--segmented", input, "segmented passages")->required();
  ref->add_option("--out", out, "standardized records JSONL")->required();
  ref->add_option("--failures", failures, "failure log path");

  CommonFlags cycle_flags;
  auto* cyc = app.add_subcommand("cycle", "run the cycle training loop");
  cycle_flags.attach(cyc);
  cyc->add_option("--standardized", input, "standardized records")->required();
  cyc->add_option("--out-dir", out_dir, "work directory")->required();
  cyc->add_option("--iterations", iterations, "number of cycles");
  cyc->add_flag("--continue-from-previous", continue_prev,
                "train from the previous iteration's checkpoint");
  cyc->add_option("--run-tag", tag, "job id prefix");

  CommonFlags filter_flags;
  FilterFlags ff;
  auto* fil = app.add_subcommand("filter", "cycle-consistency filtering");
  filter_flags.attach(fil);
  fil->add_option("--dataset", ff.dataset, "final_dataset.jsonl")->required();
  fil->add_option("--handles", ff.handles, "final_handles.json")->required();
  fil->add_option("--out-dir", ff.out_dir, "output directory")->required();
  fil->add_option("--k", ff.k, "number of clusters");
  fil->add_option("--drop-fraction", ff.drop_fraction, "share dropped");
  fil->add_option("--mode", ff.mode, "distance_rank or kcenter_coverage")
      ->check(CLI::IsMember({"distance_rank", "kcenter_coverage"}));
  fil->add_option("--seed", ff.seed, "k-means seed");
  fil->add_flag("--per-side", ff.per_side, "cluster each gold side apart");
  fil->add_flag("--serial", ff.serial, "use the serial kernels");

  CommonFlags baseline_flags;
  auto* bas = app.add_subcommand("baseline", "seed-based back-translation");
  baseline_flags.attach(bas);
  bas->add_option("--gold", input, "gold pairs JSONL")->required();
  bas->add_option("--method", method, "seed selection")
      ->check(CLI::IsMember({"random", "cluster"}));
  bas->add_option("--fraction", fraction, "seed share of the gold corpus");
  bas->add_option("--seed", seed, "selection seed");
  bas->add_option("--out-dir", out_dir, "output directory")->required();

  CommonFlags judge_flags;
  auto* jud = app.add_subcommand("judge", "LLM-judge quality scores");
  judge_flags.attach(jud);
  jud->add_option("--dataset", dataset, "pairs JSONL")->required();
  jud->add_option("--out", out, "judge_scores.jsonl")->required();
  jud->add_option("--sample-n", sample_n, "pairs to score");
  jud->add_option("--seed", judge_seed, "sampling seed");
  jud->add_option("--summary", summary, "summary JSON path");

  auto* cor = app.add_subcommand("correlate", "quality/performance Pearson");
  cor->add_option("--scores", scores, "CSV method,metric,value")->required();
  cor->add_option("--x-metric", x_metric, "quality metric name");
  cor->add_option("--y-metric", y_metric, "downstream metric name");
  cor->add_option("--out", out, "correlation_report.json");

  CommonFlags run_flags;
  auto* run = app.add_subcommand("run", "full pipeline into a run directory");
  run_flags.attach(run);
  run->add_option("--input", input, "documents (overrides config.input)");
  run->add_option("--run-dir", run_dir, "run directory")->required();

  auto* res = app.add_subcommand("resume", "continue an interrupted run");
  res->add_option("--run-dir", run_dir, "run directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*seg) return cmd_segment(input, out);
    if (*ref) return cmd_reformat(reformat_flags, input, out, failures);
    if (*cyc) {
      return cmd_cycle(cycle_flags, input, out_dir, iterations, continue_prev,
                       tag);
    }
    if (*fil) return cmd_filter(filter_flags, ff);
    if (*bas) {
      return cmd_baseline(baseline_flags, input, method, fraction, seed,
                          out_dir);
    }
    if (*jud) {
      return cmd_judge(judge_flags, dataset, out, sample_n, judge_seed,
                       summary);
    }
    if (*cor) return cmd_correlate(scores, x_metric, y_metric, out);
    if (*run) return cmd_run(run_flags, input, run_dir);
    if (*res) return cmd_resume(run_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
