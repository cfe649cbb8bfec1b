// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0
//
// One PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cyclesynth/corpus.hpp"
#include "cyclesynth/evalkit.hpp"
#include "cyclesynth/filter.hpp"
#include "cyclesynth/kmeans.hpp"
#include "cyclesynth/mock_backend.hpp"
#include "cyclesynth/pipeline.hpp"
#include "cyclesynth/prompts.hpp"
#include "cyclesynth/stats.hpp"
#include "cyclesynth/text.hpp"
#include "oracles/kcenter_oracle.hpp"
#include "oracles/partition_oracle.hpp"
#include "oracles/stats_oracle.hpp"
#include "support.hpp"

using namespace cyclesynth;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances.
constexpr double kAlpacaR = 0.904, kAlpacaRTol = 0.005;
constexpr double kAlpacaP = 0.0052, kAlpacaPTol = 0.001;
constexpr double kOtherRTol = 0.01;
constexpr double kPearsonBudgetS = 1.0;
constexpr double kRetentionLo = 0.94, kRetentionHi = 0.96;
constexpr double kFilterBudgetS = 30.0;
constexpr double kInertiaRelTol = 1e-9;
constexpr double kPearsonOracleTol = 1e-12;
constexpr double kTOracleTol = 1e-8;

// Fixture sizes and seeds, fixed before the first run.
constexpr std::size_t kFilterPairs = 10000;
constexpr std::size_t kFilterDim = 16;
constexpr std::uint64_t kFilterSeed = 42;
constexpr std::size_t kMockQuestions = 50, kMockAnswers = 70;
constexpr int kFuzzDocuments = 10000;
constexpr int kRandomCases = 1000;

/// Collects failure reasons for one criterion.
struct Check {
  std::vector<std::string> problems;
  std::string detail;
  void expect(bool ok, const std::string& what) {
    if (!ok && problems.size() < 5) problems.push_back(what);
    if (!ok && problems.size() == 5) problems.push_back("...");
  }
};

int failures = 0;

void report(const std::string& name, const std::function<void(Check&)>& body) {
  Check c;
  try {
    body(c);
  } catch (const std::exception& e) {
    c.problems.push_back(std::string("exception: ") + e.what());
  }
  const bool ok = c.problems.empty();
  if (!ok) ++failures;
  std::printf("%s %s", ok ? "PASS" : "FAIL", name.c_str());
  if (!c.detail.empty()) std::printf(" (%s)", c.detail.c_str());
  std::printf("\n");
  for (const auto& p : c.problems) std::printf("    %s\n", p.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

void pearson_reproduction(Check& c) {
  const auto t0 = Clock::now();
  const fs::path data = testing_support::source_dir() / "data";
  struct Row {
    const char* file;
    double r;
  };
  const std::vector<Row> others = {{"scores_dolly.csv", 0.743},
                                   {"scores_oasst1.csv", 0.872},
                                   {"scores_wikihow.csv", 0.853}};
  const auto alpaca =
      build_report(read_scores(data / "scores_alpaca.csv"), "quality", "avg");
  c.expect(alpaca.methods.size() == 7, "alpaca: expected 7 methods");
  c.expect(std::fabs(alpaca.result.r - kAlpacaR) <= kAlpacaRTol,
           "alpaca r = " + fmt("%.4f", alpaca.result.r));
  c.expect(std::fabs(alpaca.result.p - kAlpacaP) <= kAlpacaPTol,
           "alpaca p = " + fmt("%.5f", alpaca.result.p));
  std::string detail = "alpaca r=" + fmt("%.4f", alpaca.result.r) +
                       " p=" + fmt("%.4f", alpaca.result.p);
  for (const auto& row : others) {
    const auto rep = build_report(read_scores(data / row.file), "quality", "avg");
    c.expect(rep.methods.size() == 7, std::string(row.file) + ": expected 7 methods");
    c.expect(std::fabs(rep.result.r - row.r) <= kOtherRTol,
             std::string(row.file) + " r = " + fmt("%.4f", rep.result.r));
    detail += std::string(", ") + row.file + " r=" + fmt("%.4f", rep.result.r);
  }
  const double s = seconds_since(t0);
  c.expect(s < kPearsonBudgetS, "runtime " + fmt("%.3f s", s));
  c.detail = detail + ", " + fmt("%.3f s", s);
}

void filter_retention(Check& c) {
  std::mt19937_64 gen(kFilterSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredPair> scored(kFilterPairs);
  PointSet emb(kFilterPairs, kFilterDim);
  for (std::size_t i = 0; i < kFilterPairs; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "p%05zu", i);
    scored[i].pair_id = id;
    scored[i].gold_side = i % 2 == 0 ? GoldSide::instruction : GoldSide::response;
    scored[i].reconstruction = "r";
    scored[i].distance = u(gen);
    for (double& x : emb.row(i)) x = u(gen);
  }
  const auto t0 = Clock::now();
  const FilterResult res = filter_scored(scored, emb, FilterConfig{});
  const double s = seconds_since(t0);

  const double retention = res.retention();
  c.expect(retention >= kRetentionLo && retention <= kRetentionHi,
           "retention " + fmt("%.4f", retention));
  std::size_t total = 0, dropped = 0;
  for (const auto& cl : res.clusters) {
    total += cl.size;
    dropped += cl.dropped;
    c.expect(cl.dropped == cl.size / 20,
             "cluster " + std::to_string(cl.cluster_id) + " of size " +
                 std::to_string(cl.size) + " dropped " + std::to_string(cl.dropped));
  }
  c.expect(total == kFilterPairs, "cluster sizes do not cover the dataset");
  c.expect(res.kept.size() + dropped == kFilterPairs, "kept + dropped != n");
  c.expect(s < kFilterBudgetS, "runtime " + fmt("%.2f s", s));
  c.detail = "retention=" + fmt("%.4f", retention) + ", k=" +
             std::to_string(res.effective_k) + ", " + fmt("%.2f s", s);
}

void oracle_equivalence(Check& c) {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // k-means against the exhaustive partition on separable fixtures.
  std::size_t kmeans_cases = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 2 + trial % 3;
    const std::size_t n = static_cast<std::size_t>(k) + 1 + trial % (9 - k);
    std::vector<std::vector<double>> rows;
    PointSet pts(3);
    for (std::size_t i = 0; i < n; ++i) {
      const double g = static_cast<double>(i % static_cast<std::size_t>(k));
      std::vector<double> p = {100.0 * g + u(gen), -80.0 * g + u(gen), u(gen)};
      pts.push_back(p);
      rows.push_back(std::move(p));
    }
    KMeansOptions o;
    o.k = static_cast<std::size_t>(k);
    o.seed = static_cast<std::uint64_t>(trial);
    const double got = kmeans(pts, o).inertia;
    const double best = oracle::best_partition_cost(rows, k);
    c.expect(std::fabs(got - best) <= kInertiaRelTol * std::max(1.0, best),
             "k-means trial " + std::to_string(trial) + ": " + fmt("%.6f", got) +
                 " vs " + fmt("%.6f", best));
    ++kmeans_cases;
  }

  // k-center pruning against the reference greedy.
  FilterConfig kc;
  kc.pruning_mode = PruningMode::kcenter_coverage;
  for (int trial = 0; trial < kRandomCases; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 10);
    kc.drop_fraction = u(gen) * 0.9;
    PointSet pts(n, 4);
    std::vector<ClusterMember> members;
    std::vector<oracle::KCenterItem> items;
    for (std::size_t i = 0; i < n; ++i) {
      for (double& x : pts.row(i)) x = std::floor(u(gen) * 3.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = "m" + std::to_string(i);
      const double d = std::floor(u(gen) * 4.0);
      members.push_back({id, d, pts.row(i)});
      items.push_back({id, d, {pts.row(i).begin(), pts.row(i).end()}});
    }
    const auto keep = prune_cluster(members, kc);
    const std::size_t retain = n - drop_count(n, kc.drop_fraction);
    c.expect(keep == oracle::kcenter_keep(items, retain),
             "k-center case " + std::to_string(trial));
  }

  // distance_rank monotonicity.
  FilterConfig dr;
  for (int trial = 0; trial < kRandomCases; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(gen() % 120);
    dr.drop_fraction = u(gen) * 0.5;
    PointSet pts(n, 1);
    std::vector<ClusterMember> members;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse distances so ties occur.
      members.push_back({"m" + std::to_string(i), std::floor(u(gen) * 20.0) / 20.0,
                         pts.row(i)});
    }
    const auto keep = prune_cluster(members, dr);
    std::size_t kept = 0;
    for (std::size_t i = 0; i < n; ++i) {
      kept += keep[i];
      for (std::size_t j = 0; j < n; ++j) {
        if (keep[i] && !keep[j]) {
          c.expect(members[i].distance <= members[j].distance,
                   "monotonicity case " + std::to_string(trial));
        }
      }
    }
    c.expect(kept == n - drop_count(n, dr.drop_fraction),
             "drop count case " + std::to_string(trial));
  }
  c.detail = std::to_string(kmeans_cases) + " k-means fixtures, " +
             std::to_string(kRandomCases) + " k-center and " +
             std::to_string(kRandomCases) + " distance-rank cases";
}

void mock_end_to_end(Check& c) {
  testing_support::TempDir dir;
  // One passage per document keeps the expected counts obvious.
  std::vector<Json> docs;
  for (std::size_t i = 0; i < kMockQuestions; ++i) {
    docs.push_back({{"doc_id", "q" + std::to_string(i)},
                    {"text", "How does item " + std::to_string(i) + " work?"},
                    {"source", "fixture"}});
  }
  for (std::size_t j = 0; j < kMockAnswers; ++j) {
    docs.push_back({{"doc_id", "a" + std::to_string(j)},
                    {"text", "Item " + std::to_string(j) + " is described here."},
                    {"source", "fixture"}});
  }
  jsonl::write(dir / "docs.jsonl", docs);
  RunConfig cfg;
  cfg.run_id = "acc";
  cfg.input = dir / "docs.jsonl";
  cfg.template_dir = CYCLESYNTH_TEMPLATE_DIR;
  cfg.cycle.iterations = 1;

  for (const char* name : {"first", "second"}) {
    MockBackend backend;
    MockTrainer trainer;
    Pipeline(cfg, dir / name, &backend, &trainer).run();
  }
  const fs::path run = dir / "first";
  const auto corpus = read_standardized(run / "reformat/standardized.jsonl");
  c.expect(corpus.instructions.size() == kMockQuestions, "N_Q' mismatch");
  c.expect(corpus.responses.size() == kMockAnswers, "N_A' mismatch");

  const auto final_pairs = read_pairs(run / "cycle/final_dataset.jsonl");
  c.expect(final_pairs.size() == kMockQuestions + kMockAnswers,
           "|D_final| = " + std::to_string(final_pairs.size()));
  std::map<std::string, std::string> source;
  for (const auto& r : corpus.instructions) source["q:" + r.record_id] = r.text;
  for (const auto& r : corpus.responses) source["a:" + r.record_id] = r.text;
  for (const auto& p : final_pairs) {
    const auto it = source.find(p.pair_id);
    c.expect(it != source.end() && it->second == p.gold_text(),
             "gold side differs for " + p.pair_id);
  }

  std::size_t q_side = 0;
  for (const auto& row : jsonl::read(run / "filter/filter_report.jsonl")) {
    if (row.at("gold_side") != "instruction") continue;
    ++q_side;
    c.expect(!row.at("distance").is_null() && row.at("distance").get<double>() == 0.0,
             "Q-side distance nonzero for " + row.at("pair_id").get<std::string>());
  }
  c.expect(q_side == kMockQuestions, "Q-side report rows missing");

  c.expect(testing_support::tree(dir / "first") == testing_support::tree(dir / "second"),
           "repeated runs differ");
  c.detail = "|D_final|=" + std::to_string(final_pairs.size());
}

const Bindings& canaries(TemplateId id) {
  static const std::map<TemplateId, Bindings> kCanaries = {
      {TemplateId::reformat_prompter, {{"instruction", "CANARY-INSTRUCTION-7f3a"}}},
      {TemplateId::reformat_assistant, {{"output", "CANARY-OUTPUT-91c2"}}},
      {TemplateId::pseudo_answer, {{"instruction", "CANARY-INSTRUCTION-7f3a"}}},
      {TemplateId::pseudo_instruction, {{"output", "CANARY-OUTPUT-91c2"}}},
      {TemplateId::qa_judge,
       {{"answer", "CANARY-ANSWER-05be"}, {"question", "CANARY-QUESTION-d44e"}}},
  };
  return kCanaries.at(id);
}

void prompt_fidelity(Check& c) {
  const auto& reg = testing_support::prompts();
  int n = 0;
  for (TemplateId id : {TemplateId::reformat_prompter, TemplateId::reformat_assistant,
                        TemplateId::pseudo_answer, TemplateId::pseudo_instruction,
                        TemplateId::qa_judge}) {
    const auto golden = testing_support::slurp(testing_support::source_dir() /
                                               "golden" /
                                               (std::string(to_string(id)) + ".golden"));
    c.expect(reg.render(id, canaries(id)).text == golden,
             std::string(to_string(id)) + " differs from its golden file");
    ++n;
  }
  c.detail = std::to_string(n) + " templates";
}

void segmentation(Check& c) {
  // Expected counts are written out per document.
  struct Doc {
    const char* text;
    std::size_t q, a;
  };
  const std::vector<Doc> crafted = {
      {"What is rain?\n\nWater falling from clouds.", 1, 1},
      {"为什么天空是蓝色的？\n\n因为散射。", 1, 1},
      {"One.\n \nTwo.\n\t\nThree?", 1, 2},
      {"Line one\nline two?\nline three\n\n\n\nAfter gap.", 1, 1},
      {"\n\n  Leading blanks.  \n\n", 0, 1},
      {"No question here at all.", 0, 1},
      {"Is this? And this？", 1, 0},
      {"First\r\n\r\nSecond?\r\n", 1, 1},
      {"A\n\nB\n\nC\n\nD?\n\nE？", 2, 3},
      {"Mixed full-width？ mark\nwith text\n\nplain line\n \n \n", 1, 1},
      {"Ends with question mark?", 1, 0},
      {"Q1?\n\nQ2?\n\nQ3?\n\nanswer", 3, 1},
  };
  std::vector<RawDocument> docs;
  std::size_t want_q = 0, want_a = 0;
  for (std::size_t i = 0; i < crafted.size(); ++i) {
    docs.push_back({"doc" + std::to_string(i), crafted[i].text, "crafted"});
    want_q += crafted[i].q;
    want_a += crafted[i].a;
  }
  const auto seg = segment_corpus(docs);
  c.expect(seg.n_questions() == want_q,
           "N_Q = " + std::to_string(seg.n_questions()) + ", want " +
               std::to_string(want_q));
  c.expect(seg.n_answers() == want_a,
           "N_A = " + std::to_string(seg.n_answers()) + ", want " +
               std::to_string(want_a));

  // Fuzzed documents built from known paragraphs and blank-line separators.
  std::mt19937_64 gen(77);
  const std::vector<std::string> words = {"alpha", "beta?", "gamma", "δέλτα",
                                          "问题？", "x.y",  "42",    "tab\there"};
  const std::vector<std::string> blanks = {"", " ", "\t", "  \t ", "\r"};
  std::vector<RawDocument> fuzz;
  std::vector<std::vector<std::string>> expected;
  for (int d = 0; d < kFuzzDocuments; ++d) {
    std::vector<std::string> paras;
    const int n_paras = 1 + static_cast<int>(gen() % 6);
    for (int p = 0; p < n_paras; ++p) {
      std::string para;
      const int n_lines = 1 + static_cast<int>(gen() % 3);
      for (int l = 0; l < n_lines; ++l) {
        if (l > 0) para += "\n";
        const int n_words = 1 + static_cast<int>(gen() % 4);
        for (int w = 0; w < n_words; ++w) {
          if (w > 0) para += " ";
          para += words[gen() % words.size()];
        }
      }
      paras.push_back(para);
    }
    std::string text;
    auto separator = [&] {
      std::string s = "\n";
      const int n = 1 + static_cast<int>(gen() % 3);
      for (int i = 0; i < n; ++i) s += blanks[gen() % blanks.size()] + "\n";
      return s;
    };
    if (gen() % 2) text += separator();
    for (std::size_t p = 0; p < paras.size(); ++p) {
      if (p > 0) text += separator();
      text += paras[p];
    }
    if (gen() % 2) text += separator();
    fuzz.push_back({"f" + std::to_string(d), text, "fuzz"});
    expected.push_back(std::move(paras));
  }
  const auto fseg = segment_corpus(fuzz);
  std::map<std::string, std::string> got;
  for (const auto& p : fseg.questions) {
    c.expect(text::contains_question_mark(p.text), "question without a mark");
    c.expect(got.emplace(p.passage_id, p.text).second, "duplicate passage id");
  }
  for (const auto& p : fseg.answers) {
    c.expect(!text::contains_question_mark(p.text), "answer with a mark");
    c.expect(got.emplace(p.passage_id, p.text).second, "passage in both sets");
  }
  std::size_t total = 0;
  for (std::size_t d = 0; d < fuzz.size(); ++d) {
    for (std::size_t p = 0; p < expected[d].size(); ++p) {
      ++total;
      const auto it = got.find(make_passage_id(fuzz[d].doc_id, p));
      c.expect(it != got.end() && it->second == expected[d][p],
               "paragraph " + std::to_string(p) + " of " + fuzz[d].doc_id);
    }
  }
  c.expect(got.size() == total, "extra passages");
  c.detail = "N_Q=" + std::to_string(seg.n_questions()) +
             " N_A=" + std::to_string(seg.n_answers()) + ", " +
             std::to_string(kFuzzDocuments) + " fuzzed documents";
}

void statistics(Check& c) {
  std::mt19937_64 gen(5150);
  std::normal_distribution<double> d(0.0, 1.0);
  double worst_r = 0.0;
  for (int trial = 0; trial < kRandomCases; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(gen() % 60);
    const double slope = d(gen);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = d(gen);
      y[i] = slope * x[i] + d(gen);
    }
    const double got = stats::pearson(x, y).r;
    const double want = static_cast<double>(oracle::pearson_r(x, y));
    worst_r = std::max(worst_r, std::fabs(got - want));
  }
  c.expect(worst_r <= kPearsonOracleTol, "pearson max error " + fmt("%.3g", worst_r));

  double worst_p = 0.0;
  for (int df = 3; df <= 30; ++df) {
    for (int k = -20; k <= 20; ++k) {
      const double t = 0.5 * k;
      worst_p = std::max(
          worst_p, std::fabs(stats::student_t_two_sided_p(t, df) -
                             static_cast<double>(oracle::t_two_sided_p(t, df))));
      worst_p = std::max(worst_p,
                         std::fabs(stats::student_t_cdf(t, df) -
                                   static_cast<double>(oracle::t_cdf(t, df))));
    }
  }
  c.expect(worst_p <= kTOracleTol, "t max error " + fmt("%.3g", worst_p));
  c.detail = "pearson err " + fmt("%.2g", worst_r) + ", t err " + fmt("%.2g", worst_p);
}

}  // namespace

int main() {
  report("pearson-reproduction", pearson_reproduction);
  report("filter-retention", filter_retention);
  report("clustering-pruning-oracles", oracle_equivalence);
  report("mock-end-to-end", mock_end_to_end);
  report("prompt-fidelity", prompt_fidelity);
  report("segmentation", segmentation);
  report("statistics-self-tests", statistics);
  return failures == 0 ? 0 : 1;
}
