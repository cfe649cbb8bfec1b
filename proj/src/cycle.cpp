// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/cycle.hpp"

#include "cyclesynth/error.hpp"

namespace cyclesynth {

namespace fs = std::filesystem;

void CycleConfig::validate() const {
  if (iterations < 1) {
    throw ConfigError("cycle.iterations must be >= 1, got " +
                      std::to_string(iterations));
  }
  generation.validate();
  hyper.validate();
}

Json to_json(const CycleConfig& c) {
  Json j;
  j["iterations"] = c.iterations;
  j["continue_from_previous"] = c.continue_from_previous;
  return j;
}

CycleConfig cycle_config_from_json(const Json& j) {
  CycleConfig c;
  c.iterations = j.value("iterations", c.iterations);
  c.continue_from_previous =
      j.value("continue_from_previous", c.continue_from_previous);
  return c;
}

Json to_json(const JobRecord& r) {
  Json j;
  j["iteration"] = r.iteration;
  j["job_id"] = r.job_id;
  j["direction"] = to_string(r.direction);
  j["base_handle"] = r.base_handle;
  j["result"] = to_json(r.result);
  return j;
}

std::vector<PseudoPair> step1_pseudo_answers(
    const std::vector<Record>& instructions, const ModelHandle& forward,
    Client& client, const PromptRegistry& prompts,
    const GenerationParams& params, int iteration,
    std::vector<StageFailure>& failures) {
  if (forward.role != ModelRole::forward) {
    throw ValidationError("step 1 needs a forward handle");
  }
  std::vector<RenderedPrompt> rendered;
  rendered.reserve(instructions.size());
  for (const auto& r : instructions) {
    if (r.kind != RecordKind::instruction) {
      throw ValidationError("step 1 input " + r.record_id +
                            " is not an instruction");
    }
    rendered.push_back(
        prompts.render(TemplateId::pseudo_answer, {{"instruction", r.text}}));
  }
  const auto outcomes = client.generate_batch(forward, rendered, params);
  const std::string stage = "iter" + std::to_string(iteration) + "/step1";
  std::vector<PseudoPair> pairs;
  pairs.reserve(instructions.size());
  for (std::size_t i = 0; i < instructions.size(); ++i) {
    const auto& r = instructions[i];
    if (!outcomes[i].ok()) {
      failures.push_back(make_failure(r.record_id, stage, outcomes[i]));
      continue;
    }
    pairs.push_back({q_pair_id(r.record_id), r.text, *outcomes[i].text,
                     GoldSide::instruction, iteration, PairDirection::q_to_a,
                     r.record_id});
  }
  return pairs;
}

TrainingJobSpec step2_emit_backward_training(
    const std::vector<PseudoPair>& pairs, const PromptRegistry& prompts,
    std::string job_id, const ModelHandle& base, const Hyperparameters& hyper) {
  return emit_training_job(pairs, GoldSide::instruction, prompts,
                           std::move(job_id), base, hyper);
}

std::vector<PseudoPair> step3_pseudo_instructions(
    const std::vector<Record>& responses, const ModelHandle& backward,
    Client& client, const PromptRegistry& prompts,
    const GenerationParams& params, int iteration,
    std::vector<StageFailure>& failures) {
  if (backward.role != ModelRole::backward) {
    throw ValidationError("step 3 needs a backward handle");
  }
  std::vector<RenderedPrompt> rendered;
  rendered.reserve(responses.size());
  for (const auto& r : responses) {
    if (r.kind != RecordKind::response) {
      throw ValidationError("step 3 input " + r.record_id +
                            " is not a response");
    }
    rendered.push_back(
        prompts.render(TemplateId::pseudo_instruction, {{"output", r.text}}));
  }
  const auto outcomes = client.generate_batch(backward, rendered, params);
  const std::string stage = "iter" + std::to_string(iteration) + "/step3";
  std::vector<PseudoPair> pairs;
  pairs.reserve(responses.size());
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const auto& r = responses[i];
    if (!outcomes[i].ok()) {
      failures.push_back(make_failure(r.record_id, stage, outcomes[i]));
      continue;
    }
    pairs.push_back({a_pair_id(r.record_id), *outcomes[i].text, r.text,
                     GoldSide::response, iteration, PairDirection::a_to_q,
                     r.record_id});
  }
  return pairs;
}

TrainingJobSpec step4_emit_forward_training(
    const std::vector<PseudoPair>& pairs, const PromptRegistry& prompts,
    std::string job_id, const ModelHandle& base, const Hyperparameters& hyper) {
  return emit_training_job(pairs, GoldSide::response, prompts,
                           std::move(job_id), base, hyper);
}

void write_handles(const fs::path& path, const CycleHandles& h) {
  Json j;
  j["forward"] = to_json(h.forward);
  j["backward"] = to_json(h.backward);
  jsonl::write_json(path, j);
}

CycleHandles read_handles(const fs::path& path) {
  const Json j = jsonl::read_json(path);
  return {model_handle_from_json(j.at("forward")),
          model_handle_from_json(j.at("backward"))};
}

CycleEngine::CycleEngine(Client& client, Trainer& trainer,
                         const PromptRegistry& prompts, CycleConfig config,
                         std::optional<fs::path> work_dir, std::string run_tag)
    : client_(client),
      trainer_(trainer),
      prompts_(prompts),
      config_(std::move(config)),
      work_dir_(std::move(work_dir)),
      run_tag_(std::move(run_tag)) {
  config_.validate();
}

namespace {

// Per-iteration step state, persisted as handles.json.
struct IterationState {
  int iteration = 0;
  ModelHandle forward_in;
  ModelHandle backward_in;
  std::optional<JobRecord> backward_job;
  std::optional<JobRecord> forward_job;
};

Json to_json(const IterationState& s) {
  Json j;
  j["iteration"] = s.iteration;
  j["forward_in"] = to_json(s.forward_in);
  j["backward_in"] = to_json(s.backward_in);
  j["backward_job"] = s.backward_job ? to_json(*s.backward_job) : Json(nullptr);
  j["forward_job"] = s.forward_job ? to_json(*s.forward_job) : Json(nullptr);
  return j;
}

JobRecord job_record_from_json(const Json& j) {
  return {j.at("iteration").get<int>(), j.at("job_id").get<std::string>(),
          model_role_from_string(j.at("direction").get<std::string>()),
          j.at("base_handle").get<std::string>(),
          model_handle_from_json(j.at("result"))};
}

IterationState iteration_state_from_json(const Json& j) {
  IterationState s;
  s.iteration = j.at("iteration").get<int>();
  s.forward_in = model_handle_from_json(j.at("forward_in"));
  s.backward_in = model_handle_from_json(j.at("backward_in"));
  if (!j.at("backward_job").is_null()) {
    s.backward_job = job_record_from_json(j["backward_job"]);
  }
  if (!j.at("forward_job").is_null()) {
    s.forward_job = job_record_from_json(j["forward_job"]);
  }
  return s;
}

}  // namespace

CycleResult CycleEngine::run(const StandardizedCorpus& corpus,
                             const ModelHandle& base) {
  const ModelHandle base_fwd = derive_handle(base, ModelRole::forward);
  const ModelHandle base_bwd = derive_handle(base, ModelRole::backward);

  CycleResult result;
  CycleHandles current{base_fwd, base_bwd};
  std::vector<PseudoPair> q_pairs;
  std::vector<PseudoPair> a_pairs;

  for (int t = 1; t <= config_.iterations; ++t) {
    const std::optional<fs::path> dir =
        work_dir_ ? std::optional<fs::path>(*work_dir_ /
                                            ("iter_" + std::to_string(t)))
                  : std::nullopt;
    if (dir) fs::create_directories(*dir);

    IterationState state;
    if (dir && fs::exists(*dir / "handles.json")) {
      state = iteration_state_from_json(jsonl::read_json(*dir / "handles.json"));
    } else {
      state.iteration = t;
      state.forward_in = current.forward;
      state.backward_in = current.backward;
    }
    auto save_state = [&] {
      if (dir) jsonl::write_json(*dir / "handles.json", to_json(state));
    };
    save_state();

    // Step 1.
    std::vector<StageFailure> step1_failures;
    if (dir && fs::exists(*dir / "pairs_step1.jsonl")) {
      q_pairs = read_pairs(*dir / "pairs_step1.jsonl");
      step1_failures = read_failures(*dir / "failures_step1.jsonl");
    } else {
      q_pairs = step1_pseudo_answers(corpus.instructions, state.forward_in,
                                     client_, prompts_, config_.generation, t,
                                     step1_failures);
      if (dir) {
        write_failures(*dir / "failures_step1.jsonl", step1_failures);
        write_pairs(*dir / "pairs_step1.jsonl", q_pairs);
      }
    }

    // Step 2.
    if (!state.backward_job) {
      const ModelHandle train_base =
          config_.continue_from_previous ? state.backward_in : base_bwd;
      TrainingJobSpec job = step2_emit_backward_training(
          q_pairs, prompts_, run_tag_ + "-it" + std::to_string(t) + "-backward",
          train_base, config_.hyper);
      if (dir) {
        job.dataset_path = "sft_backward.jsonl";
        write_sft(*dir / "sft_backward.jsonl", job.examples);
        jsonl::write_json(*dir / "job_backward.json", to_json(job));
      }
      ModelHandle trained = trainer_.submit(job);
      state.backward_job = JobRecord{t, job.job_id, ModelRole::backward,
                                     train_base.handle_id, std::move(trained)};
      save_state();
    }
    result.jobs.push_back(*state.backward_job);
    current.backward = state.backward_job->result;

    // Step 3 uses the backward model trained in step 2 of this iteration.
    std::vector<StageFailure> step3_failures;
    if (dir && fs::exists(*dir / "pairs_step3.jsonl")) {
      a_pairs = read_pairs(*dir / "pairs_step3.jsonl");
      step3_failures = read_failures(*dir / "failures_step3.jsonl");
    } else {
      a_pairs = step3_pseudo_instructions(corpus.responses, current.backward,
                                          client_, prompts_,
                                          config_.generation, t,
                                          step3_failures);
      if (dir) {
        write_failures(*dir / "failures_step3.jsonl", step3_failures);
        write_pairs(*dir / "pairs_step3.jsonl", a_pairs);
      }
    }

    // Step 4.
    if (!state.forward_job) {
      const ModelHandle train_base =
          config_.continue_from_previous ? state.forward_in : base_fwd;
      TrainingJobSpec job = step4_emit_forward_training(
          a_pairs, prompts_, run_tag_ + "-it" + std::to_string(t) + "-forward",
          train_base, config_.hyper);
      if (dir) {
        job.dataset_path = "sft_forward.jsonl";
        write_sft(*dir / "sft_forward.jsonl", job.examples);
        jsonl::write_json(*dir / "job_forward.json", to_json(job));
      }
      ModelHandle trained = trainer_.submit(job);
      state.forward_job = JobRecord{t, job.job_id, ModelRole::forward,
                                    train_base.handle_id, std::move(trained)};
      save_state();
    }
    result.jobs.push_back(*state.forward_job);
    current.forward = state.forward_job->result;

    for (auto& f : step1_failures) result.failures.push_back(std::move(f));
    for (auto& f : step3_failures) result.failures.push_back(std::move(f));
  }

  result.final.q_side = q_pairs.size();
  result.final.a_side = a_pairs.size();
  result.final.pairs = std::move(q_pairs);
  for (auto& p : a_pairs) result.final.pairs.push_back(std::move(p));
  result.final_handles = current;

  if (work_dir_) {
    write_dataset(*work_dir_ / "final_dataset.jsonl", result.final.pairs);
    write_handles(*work_dir_ / "final_handles.json", current);
  }
  return result;
}

CycleResult run_cycles(const StandardizedCorpus& corpus,
                       const CycleConfig& config, Trainer& trainer,
                       Client& client, const PromptRegistry& prompts,
                       const ModelHandle& base) {
  return CycleEngine(client, trainer, prompts, config).run(corpus, base);
}

}  // namespace cyclesynth
