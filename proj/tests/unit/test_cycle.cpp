// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <mutex>
#include <set>

#include "cyclesynth/cycle.hpp"
#include "cyclesynth/error.hpp"
#include "cyclesynth/mock_backend.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cyclesynth;
using testing_support::mock_corpus;
using testing_support::prompts;
using testing_support::TempDir;

namespace {

const ModelHandle kBase{"base", ModelRole::base, {}};

// Records which handle served each template.
class RecordingBackend : public MockBackend {
 public:
  std::string complete(const ModelHandle& handle, const RenderedPrompt& prompt,
                       const GenerationParams& params) override {
    {
      std::lock_guard lock(mu_);
      log_.emplace_back(prompt.template_id, handle.handle_id);
    }
    return MockBackend::complete(handle, prompt, params);
  }
  std::set<std::string> handles_for(TemplateId id) const {
    std::lock_guard lock(mu_);
    std::set<std::string> out;
    for (const auto& [t, h] : log_) {
      if (t == id) out.insert(h);
    }
    return out;
  }
  void clear() {
    std::lock_guard lock(mu_);
    log_.clear();
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::pair<TemplateId, std::string>> log_;
};

}  // namespace

TEST_CASE("step 1 and step 3 under the mock") {
  MockBackend mock;
  Client client(mock);
  std::vector<StageFailure> failures;
  const auto q = step1_pseudo_answers(
      {testing_support::make_record("r1", RecordKind::instruction, "Qr[x?]")},
      derive_handle(kBase, ModelRole::forward), client, prompts(), {}, 1, failures);
  REQUIRE(q.size() == 1);
  CHECK(q[0].instruction == "Qr[x?]");
  CHECK(q[0].response == "A[Qr[x?]]");
  CHECK(q[0].gold_side == GoldSide::instruction);
  CHECK(q[0].direction == PairDirection::q_to_a);
  CHECK(q[0].pair_id == "q:r1");

  const auto a = step3_pseudo_instructions(
      {testing_support::make_record("r2", RecordKind::response, "Ar[y]")},
      derive_handle(kBase, ModelRole::backward), client, prompts(), {}, 1, failures);
  REQUIRE(a.size() == 1);
  CHECK(a[0].instruction == "Q[Ar[y]]");
  CHECK(a[0].response == "Ar[y]");
  CHECK(a[0].pair_id == "a:r2");
  CHECK(failures.empty());

  CHECK(step1_pseudo_answers({}, derive_handle(kBase, ModelRole::forward), client,
                             prompts(), {}, 1, failures)
            .empty());
  CHECK_THROWS_AS(step1_pseudo_answers({}, derive_handle(kBase, ModelRole::backward),
                                       client, prompts(), {}, 1, failures),
                  ValidationError);
}

TEST_CASE("step 1 drops failed records") {
  MockOptions mo;
  mo.fail_substrings = {"BAD"};
  MockBackend mock(mo);
  ClientOptions co;
  co.retry.base_delay = std::chrono::milliseconds(0);
  Client client(mock, co);
  auto corpus = mock_corpus(100, 0);
  corpus.instructions[10].text = "Qr[BAD 1?]";
  corpus.instructions[20].text = "Qr[BAD 2?]";
  std::vector<StageFailure> failures;
  const auto pairs =
      step1_pseudo_answers(corpus.instructions, derive_handle(kBase, ModelRole::forward),
                           client, prompts(), {}, 1, failures);
  CHECK(pairs.size() == 98);
  REQUIRE(failures.size() == 2);
  CHECK(failures[0].item_id == corpus.instructions[10].record_id);
  CHECK(failures[0].stage == "iter1/step1");
}

TEST_CASE("training emission maps pseudo input to gold target") {
  const PseudoPair q{"q:1", "gold q", "  pseudo a \n", GoldSide::instruction,
                     1, PairDirection::q_to_a, "1"};
  const PseudoPair a{"a:2", "pseudo q", "gold a", GoldSide::response,
                     1, PairDirection::a_to_q, "2"};
  const auto bwd = step2_emit_backward_training({q}, prompts(), "jb",
                                                {"b", ModelRole::backward, {}}, {});
  CHECK(bwd.direction == ModelRole::backward);
  REQUIRE(bwd.examples.size() == 1);
  CHECK(bwd.examples[0].target == "gold q");
  CHECK(bwd.examples[0].input ==
        prompts().render(TemplateId::pseudo_instruction, {{"output", "pseudo a"}}).text);
  CHECK(bwd.objective == "nll(target|input)");

  const auto fwd = step4_emit_forward_training({a}, prompts(), "jf",
                                               {"b", ModelRole::forward, {}}, {});
  CHECK(fwd.direction == ModelRole::forward);
  CHECK(fwd.examples[0].target == "gold a");
  CHECK(fwd.examples[0].input ==
        prompts().render(TemplateId::pseudo_answer, {{"instruction", "pseudo q"}}).text);

  CHECK_THROWS_AS(step2_emit_backward_training({}, prompts(), "j", kBase, {}),
                  ValidationError);
  CHECK_THROWS_AS(step2_emit_backward_training({q, a}, prompts(), "j", kBase, {}),
                  ValidationError);
  CHECK_THROWS_AS(step2_emit_backward_training({q, q}, prompts(), "j", kBase, {}),
                  ValidationError);
  CHECK_THROWS_AS(step4_emit_forward_training({a, a}, prompts(), "j", kBase, {}),
                  ValidationError);
  CHECK_THROWS_AS(step4_emit_forward_training({}, prompts(), "j", kBase, {}),
                  ValidationError);
}

TEST_CASE("one cycle over the mock gives the disjoint union") {
  MockBackend mock;
  MockTrainer trainer;
  Client client(mock);
  const auto corpus = mock_corpus(2, 3);
  CycleConfig cfg;
  const auto res = run_cycles(corpus, cfg, trainer, client, prompts(), kBase);
  CHECK(res.final.pairs.size() == 5);
  CHECK(res.final.q_side == 2);
  CHECK(res.final.a_side == 3);
  std::set<std::string> ids;
  for (const auto& p : res.final.pairs) ids.insert(p.pair_id);
  CHECK(ids.size() == 5);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& p = res.final.pairs[i];
    CHECK(p.instruction == corpus.instructions[i].text);
    CHECK(MockBackend::backward_rule(p.response) == p.instruction);
  }
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(res.final.pairs[2 + j].response == corpus.responses[j].text);
  }
}

TEST_CASE("three cycles alternate jobs and swap handles") {
  RecordingBackend backend;
  MockTrainerOptions to;
  to.rename_handles = true;
  MockTrainer trainer(to);
  Client client(backend);
  CycleConfig cfg;
  cfg.iterations = 3;
  TempDir dir;
  CycleEngine engine(client, trainer, prompts(), cfg, dir.path(), "t");
  const auto res = engine.run(mock_corpus(3, 4), kBase);

  REQUIRE(res.jobs.size() == 6);
  const std::vector<std::string> expected = {"t-it1-backward", "t-it1-forward",
                                             "t-it2-backward", "t-it2-forward",
                                             "t-it3-backward", "t-it3-forward"};
  CHECK(trainer.submitted() == expected);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(res.jobs[i].job_id == expected[i]);
    CHECK(res.jobs[i].direction ==
          (i % 2 == 0 ? ModelRole::backward : ModelRole::forward));
    // Re-training from the base checkpoint by default.
    CHECK(res.jobs[i].base_handle == "base");
  }
  // Step 3 used each iteration's fresh backward model; step 1 of iterations
  // 2 and 3 used the previous forward model.
  CHECK(backend.handles_for(TemplateId::pseudo_instruction) ==
        std::set<std::string>{"t-it1-backward", "t-it2-backward", "t-it3-backward"});
  CHECK(backend.handles_for(TemplateId::pseudo_answer) ==
        std::set<std::string>{"base", "t-it1-forward", "t-it2-forward"});
  CHECK(res.final_handles.forward.handle_id == "t-it3-forward");
  CHECK(res.final_handles.backward.lineage ==
        std::vector<std::string>{"t-it3-backward"});
  for (const auto& p : res.final.pairs) CHECK(p.iteration == 3);

  for (int t = 1; t <= 3; ++t) {
    const auto it = dir / ("iter_" + std::to_string(t));
    for (const char* f : {"pairs_step1.jsonl", "sft_backward.jsonl",
                          "job_backward.json", "pairs_step3.jsonl",
                          "sft_forward.jsonl", "job_forward.json", "handles.json"}) {
      CHECK_MESSAGE(std::filesystem::exists(it / f), (it / f).string());
    }
  }
  CHECK(read_pairs(dir / "final_dataset.jsonl").size() == 7);
  CHECK(read_handles(dir / "final_handles.json").forward.handle_id == "t-it3-forward");
}

TEST_CASE("continue-from-previous chains checkpoints") {
  MockBackend mock;
  MockTrainerOptions to;
  to.rename_handles = true;
  MockTrainer trainer(to);
  Client client(mock);
  CycleConfig cfg;
  cfg.iterations = 2;
  cfg.continue_from_previous = true;
  const auto res = run_cycles(mock_corpus(1, 1), cfg, trainer, client, prompts(), kBase);
  REQUIRE(res.jobs.size() == 4);
  CHECK(res.jobs[2].base_handle == "run-it1-backward");
  CHECK(res.jobs[3].base_handle == "run-it1-forward");
  CHECK(res.final_handles.forward.lineage ==
        std::vector<std::string>{"run-it1-forward", "run-it2-forward"});
}

TEST_CASE("T must be positive") {
  CycleConfig cfg;
  cfg.iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("a failed training job halts at a resumable checkpoint") {
  MockBackend mock;
  MockTrainerOptions to;
  to.fail_jobs = {"r-it1-forward"};
  MockTrainer trainer(to);
  Client client(mock);
  TempDir dir;
  CycleConfig cfg;
  CycleEngine engine(client, trainer, prompts(), cfg, dir.path(), "r");
  const auto corpus = mock_corpus(4, 5);
  CHECK_THROWS_AS(engine.run(corpus, kBase), TrainerError);
  const auto step1 = testing_support::slurp(dir / "iter_1/pairs_step1.jsonl");
  const auto step3 = testing_support::slurp(dir / "iter_1/pairs_step3.jsonl");
  CHECK_FALSE(std::filesystem::exists(dir / "final_dataset.jsonl"));
  const auto calls = mock.complete_calls();

  trainer.clear_failures();
  const auto res = engine.run(corpus, kBase);
  CHECK(res.final.pairs.size() == 9);
  CHECK(mock.complete_calls() == calls);  // no generation repeated
  CHECK(testing_support::slurp(dir / "iter_1/pairs_step1.jsonl") == step1);
  CHECK(testing_support::slurp(dir / "iter_1/pairs_step3.jsonl") == step3);
  // The backward job was not resubmitted.
  const auto sub = trainer.submitted();
  CHECK(std::count(sub.begin(), sub.end(), "r-it1-backward") == 1);
  CHECK(std::count(sub.begin(), sub.end(), "r-it1-forward") == 2);
}
