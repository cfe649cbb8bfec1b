// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/trainer.hpp"

#include <thread>

#include "cyclesynth/http_backend.hpp"
#include "httplib.h"

namespace cyclesynth {

void Hyperparameters::validate() const {
  if (lora_rank <= 0 || lora_alpha <= 0) {
    throw ValidationError("lora rank and alpha must be positive");
  }
  if (!(lora_dropout >= 0.0 && lora_dropout < 1.0)) {
    throw ValidationError("lora_dropout must be in [0, 1)");
  }
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  if (micro_batch <= 0 || effective_batch <= 0 ||
      effective_batch % micro_batch != 0) {
    throw ValidationError(
        "effective_batch must be a positive multiple of micro_batch");
  }
  if (cutoff_len <= 0 || epochs <= 0) {
    throw ValidationError("cutoff_len and epochs must be positive");
  }
}

Json to_json(const Hyperparameters& h) {
  Json j;
  j["lora_rank"] = h.lora_rank;
  j["lora_alpha"] = h.lora_alpha;
  j["lora_dropout"] = h.lora_dropout;
  j["learning_rate"] = h.learning_rate;
  j["lr_schedule"] = h.lr_schedule;
  j["micro_batch"] = h.micro_batch;
  j["effective_batch"] = h.effective_batch;
  j["cutoff_len"] = h.cutoff_len;
  j["epochs"] = h.epochs;
  return j;
}

Hyperparameters hyperparameters_from_json(const Json& j) {
  Hyperparameters h;
  h.lora_rank = j.value("lora_rank", h.lora_rank);
  h.lora_alpha = j.value("lora_alpha", h.lora_alpha);
  h.lora_dropout = j.value("lora_dropout", h.lora_dropout);
  h.learning_rate = j.value("learning_rate", h.learning_rate);
  h.lr_schedule = j.value("lr_schedule", h.lr_schedule);
  h.micro_batch = j.value("micro_batch", h.micro_batch);
  h.effective_batch = j.value("effective_batch", h.effective_batch);
  h.cutoff_len = j.value("cutoff_len", h.cutoff_len);
  h.epochs = j.value("epochs", h.epochs);
  h.validate();
  return h;
}

void TrainingJobSpec::validate() const {
  if (job_id.empty()) throw ValidationError("training job has no id");
  if (direction != ModelRole::forward && direction != ModelRole::backward) {
    throw ValidationError("training direction must be forward or backward");
  }
  if (examples.empty()) {
    throw ValidationError("training job " + job_id + ": empty training set");
  }
  for (const auto& e : examples) {
    if (e.input.empty() || e.target.empty()) {
      throw ValidationError("training job " + job_id + ": example " +
                            e.pair_id + " has an empty input or target");
    }
  }
  if (base.handle_id.empty()) {
    throw ValidationError("training job " + job_id + ": no base model");
  }
  hyper.validate();
}

Json to_json(const SftExample& e) {
  Json j;
  j["pair_id"] = e.pair_id;
  j["input"] = e.input;
  j["target"] = e.target;
  return j;
}

Json to_json(const TrainingJobSpec& job) {
  Json j;
  j["job_id"] = job.job_id;
  j["direction"] = to_string(job.direction);
  j["objective"] = job.objective;
  j["dataset_path"] = job.dataset_path;
  j["num_examples"] = job.examples.size();
  j["hyperparameters"] = to_json(job.hyper);
  j["base_model"] = to_json(job.base);
  return j;
}

Json training_wire_request(const TrainingJobSpec& job) {
  Json j;
  j["job_id"] = job.job_id;
  j["direction"] = to_string(job.direction);
  Json data = Json::array();
  for (const auto& e : job.examples) {
    Json ex;
    ex["input"] = e.input;
    ex["target"] = e.target;
    data.push_back(std::move(ex));
  }
  j["dataset_inline"] = std::move(data);
  j["hyperparameters"] = to_json(job.hyper);
  j["base_model"] = job.base.handle_id;
  return j;
}

MockTrainer::MockTrainer(MockTrainerOptions options)
    : options_(std::move(options)) {}

ModelHandle MockTrainer::submit(const TrainingJobSpec& job) {
  try {
    job.validate();
  } catch (const ValidationError& e) {
    throw TrainerError(TrainerFailure::rejected,
                       std::string("422 unprocessable: ") + e.what());
  }
  std::lock_guard lock(mu_);
  submitted_.push_back(job.job_id);
  if (options_.fail_jobs.count(job.job_id)) {
    throw TrainerError(TrainerFailure::job_failed,
                       "mock trainer: job " + job.job_id + " failed");
  }
  ModelHandle out{options_.rename_handles ? job.job_id : job.base.handle_id,
                  job.direction, job.base.lineage};
  out.lineage.push_back(job.job_id);
  return out;
}

std::vector<std::string> MockTrainer::submitted() const {
  std::lock_guard lock(mu_);
  return submitted_;
}

void MockTrainer::clear_failures() {
  std::lock_guard lock(mu_);
  options_.fail_jobs.clear();
}

HttpTrainer::HttpTrainer(HttpTrainerOptions options)
    : options_(std::move(options)) {
  std::tie(origin_, prefix_) = split_base_url(options_.endpoint);
}

ModelHandle HttpTrainer::submit(const TrainingJobSpec& job) {
  try {
    job.validate();
  } catch (const ValidationError& e) {
    throw TrainerError(TrainerFailure::rejected, e.what());
  }
  httplib::Client cli(origin_);
  cli.set_connection_timeout(std::chrono::seconds(30));
  cli.set_read_timeout(std::chrono::seconds(120));
  httplib::Headers headers;
  if (!options_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.api_key);
  }

  auto res = cli.Post(prefix_ + "/v1/training-jobs", headers,
                      training_wire_request(job).dump(), "application/json");
  if (!res) {
    throw TrainerError(TrainerFailure::unreachable,
                       "submit " + job.job_id + ": " +
                           httplib::to_string(res.error()));
  }
  if (res->status >= 400 && res->status < 500) {
    throw TrainerError(TrainerFailure::rejected,
                       "submit " + job.job_id + ": HTTP " +
                           std::to_string(res->status) + ": " + res->body);
  }
  if (res->status != 200 && res->status != 201 && res->status != 202) {
    throw TrainerError(TrainerFailure::unreachable,
                       "submit " + job.job_id + ": HTTP " +
                           std::to_string(res->status));
  }
  std::string remote_id = job.job_id;
  try {
    remote_id = Json::parse(res->body).at("job_id").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TrainerError(TrainerFailure::rejected,
                       std::string("submit reply malformed: ") + e.what());
  }

  const auto deadline = std::chrono::steady_clock::now() + options_.timeout;
  while (true) {
    auto st = cli.Get(prefix_ + "/v1/training-jobs/" + remote_id, headers);
    if (st && st->status == 200) {
      Json body;
      try {
        body = Json::parse(st->body);
      } catch (const nlohmann::json::exception& e) {
        throw TrainerError(TrainerFailure::rejected,
                           std::string("status reply malformed: ") + e.what());
      }
      const std::string status = body.value("status", std::string());
      if (status == "done") {
        if (!body.contains("model_id") || !body["model_id"].is_string()) {
          throw TrainerError(TrainerFailure::job_failed,
                             "job " + remote_id + " done without model_id");
        }
        ModelHandle out{body["model_id"].get<std::string>(), job.direction,
                        job.base.lineage};
        out.lineage.push_back(job.job_id);
        return out;
      }
      if (status == "failed") {
        throw TrainerError(TrainerFailure::job_failed,
                           "job " + remote_id + " failed: " +
                               body.value("error", std::string("no reason")));
      }
      if (status != "queued" && status != "running") {
        throw TrainerError(TrainerFailure::rejected,
                           "job " + remote_id + ": unknown status '" + status +
                               "'");
      }
    } else if (st && st->status == 404) {
      throw TrainerError(TrainerFailure::job_failed,
                         "job " + remote_id + " unknown to trainer");
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      throw TrainerError(TrainerFailure::timeout,
                         "job " + remote_id + " did not finish in time");
    }
    std::this_thread::sleep_for(options_.poll_interval);
  }
}

}  // namespace cyclesynth
