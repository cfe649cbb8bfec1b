// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/config.hpp"

#include <cstdlib>
#include <set>

#include "cyclesynth/error.hpp"
#include "cyclesynth/http_backend.hpp"
#include "cyclesynth/prompts.hpp"

namespace cyclesynth {

namespace fs = std::filesystem;

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) {
      throw ConfigError("unknown config key " + where + "." + key);
    }
  }
}

fs::path resolve(const fs::path& p, const fs::path& base_dir) {
  if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

template <typename T>
T get_or(const Json& j, const char* key, const T& fallback) {
  try {
    return j.value(key, fallback);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config key ") + key + ": " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  if (run_id.empty()) throw ConfigError("run_id must not be empty");
  if (backend.kind != "mock" && backend.kind != "http") {
    throw ConfigError("backend.kind must be mock or http");
  }
  if (backend.kind == "http" && backend.base_url.empty()) {
    throw ConfigError("backend.base_url is required for the http backend");
  }
  if (trainer.kind != "mock" && trainer.kind != "http") {
    throw ConfigError("trainer.kind must be mock or http");
  }
  if (trainer.kind == "http" && trainer.endpoint.empty()) {
    throw ConfigError("trainer.endpoint is required for the http trainer");
  }
  if (backend.max_in_flight == 0) {
    throw ConfigError("backend.max_in_flight must be positive");
  }
  generation.validate();
  hyperparameters.validate();
  cycle.validate();
  filter.validate();
}

RunConfig config_from_json(const Json& j, const fs::path& base_dir) {
  reject_unknown(j,
                 {"run_id", "input", "template_dir", "backend", "trainer",
                  "models", "generation", "hyperparameters", "cycle", "filter",
                  "run_filter", "judge"},
                 "config");
  RunConfig c;
  c.run_id = get_or(j, "run_id", c.run_id);
  c.input = resolve(get_or(j, "input", std::string()), base_dir);
  c.template_dir = resolve(get_or(j, "template_dir", std::string()), base_dir);
  c.run_filter = get_or(j, "run_filter", c.run_filter);

  if (j.contains("backend")) {
    const Json& b = j["backend"];
    reject_unknown(b,
                   {"kind", "base_url", "timeout_s", "max_in_flight",
                    "single_flight", "max_attempts", "base_delay_ms",
                    "max_delay_ms", "embed_dim"},
                   "backend");
    auto& o = c.backend;
    o.kind = get_or(b, "kind", o.kind);
    o.base_url = get_or(b, "base_url", o.base_url);
    o.timeout_s = get_or(b, "timeout_s", o.timeout_s);
    o.max_in_flight = get_or(b, "max_in_flight", o.max_in_flight);
    o.single_flight = get_or(b, "single_flight", o.single_flight);
    o.retry.max_attempts = get_or(b, "max_attempts", o.retry.max_attempts);
    o.retry.base_delay = std::chrono::milliseconds(get_or(
        b, "base_delay_ms", static_cast<long>(o.retry.base_delay.count())));
    o.retry.max_delay = std::chrono::milliseconds(get_or(
        b, "max_delay_ms", static_cast<long>(o.retry.max_delay.count())));
    o.embed_dim = get_or(b, "embed_dim", o.embed_dim);
  }
  if (j.contains("trainer")) {
    const Json& t = j["trainer"];
    reject_unknown(t,
                   {"kind", "endpoint", "poll_interval_ms", "timeout_s"},
                   "trainer");
    auto& o = c.trainer;
    o.kind = get_or(t, "kind", o.kind);
    o.endpoint = get_or(t, "endpoint", o.endpoint);
    o.poll_interval_ms = get_or(t, "poll_interval_ms", o.poll_interval_ms);
    o.timeout_s = get_or(t, "timeout_s", o.timeout_s);
  }
  if (j.contains("models")) {
    const Json& m = j["models"];
    reject_unknown(m, {"base", "encoder", "judge"}, "models");
    c.models.base = get_or(m, "base", c.models.base);
    c.models.encoder = get_or(m, "encoder", c.models.encoder);
    c.models.judge = get_or(m, "judge", c.models.judge);
  }
  try {
    if (j.contains("generation")) {
      c.generation = generation_params_from_json(j["generation"]);
    }
    if (j.contains("hyperparameters")) {
      c.hyperparameters = hyperparameters_from_json(j["hyperparameters"]);
    }
    if (j.contains("cycle")) {
      reject_unknown(j["cycle"], {"iterations", "continue_from_previous"},
                     "cycle");
      c.cycle = cycle_config_from_json(j["cycle"]);
    }
    if (j.contains("filter")) {
      reject_unknown(j["filter"],
                     {"k_clusters", "drop_fraction", "kmeans_max_iters",
                      "kmeans_restarts", "rng_seed", "pruning_mode",
                      "joint_clustering", "kernel_mode"},
                     "filter");
      c.filter = filter_config_from_json(j["filter"]);
    }
    if (j.contains("judge")) {
      const Json& jj = j["judge"];
      reject_unknown(jj, {"sample_n", "rng_seed", "max_failure_share"},
                     "judge");
      c.judge.sample_n = get_or(jj, "sample_n", c.judge.sample_n);
      c.judge.rng_seed = get_or(jj, "rng_seed", c.judge.rng_seed);
      c.judge.max_failure_share =
          get_or(jj, "max_failure_share", c.judge.max_failure_share);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.cycle.generation = c.generation;
  c.cycle.hyper = c.hyperparameters;
  c.filter.generation = c.generation;
  c.judge.generation = c.generation;
  return c;
}

RunConfig load_config(const std::optional<fs::path>& path) {
  if (!path) return RunConfig{};
  if (!fs::exists(*path)) {
    throw ConfigError("config file not found: " + path->string());
  }
  Json j;
  try {
    j = jsonl::read_json(*path);
  } catch (const std::exception& e) {
    throw ConfigError("cannot parse " + path->string() + ": " + e.what());
  }
  return config_from_json(j, path->parent_path());
}

void apply_env(RunConfig& config) {
  if (const char* v = std::getenv("CYCLESYNTH_API_KEY")) {
    config.backend.api_key = v;
    config.trainer.api_key = v;
  }
  if (const char* v = std::getenv("CYCLESYNTH_BASE_URL")) {
    config.backend.base_url = v;
  }
  if (const char* v = std::getenv("CYCLESYNTH_TRAINER_URL")) {
    config.trainer.endpoint = v;
  }
  if (const char* v = std::getenv("CYCLESYNTH_TEMPLATES")) {
    config.template_dir = v;
  }
}

Json to_json(const RunConfig& c) {
  Json j;
  j["run_id"] = c.run_id;
  j["input"] = c.input.generic_string();
  j["template_dir"] = c.template_dir.generic_string();
  Json b;
  b["kind"] = c.backend.kind;
  b["base_url"] = c.backend.base_url;
  b["timeout_s"] = c.backend.timeout_s;
  b["max_in_flight"] = c.backend.max_in_flight;
  b["single_flight"] = c.backend.single_flight;
  b["max_attempts"] = c.backend.retry.max_attempts;
  b["base_delay_ms"] = c.backend.retry.base_delay.count();
  b["max_delay_ms"] = c.backend.retry.max_delay.count();
  b["embed_dim"] = c.backend.embed_dim;
  j["backend"] = std::move(b);
  Json t;
  t["kind"] = c.trainer.kind;
  t["endpoint"] = c.trainer.endpoint;
  t["poll_interval_ms"] = c.trainer.poll_interval_ms;
  t["timeout_s"] = c.trainer.timeout_s;
  j["trainer"] = std::move(t);
  Json m;
  m["base"] = c.models.base;
  m["encoder"] = c.models.encoder;
  m["judge"] = c.models.judge;
  j["models"] = std::move(m);
  j["generation"] = to_json(c.generation);
  j["hyperparameters"] = to_json(c.hyperparameters);
  j["cycle"] = to_json(c.cycle);
  j["filter"] = to_json(c.filter);
  j["run_filter"] = c.run_filter;
  Json jj;
  jj["sample_n"] = c.judge.sample_n;
  jj["rng_seed"] = c.judge.rng_seed;
  jj["max_failure_share"] = c.judge.max_failure_share;
  j["judge"] = std::move(jj);
  return j;
}

ModelHandle base_handle(const RunConfig& c) {
  return {c.models.base, ModelRole::base, {}};
}
ModelHandle encoder_handle(const RunConfig& c) {
  return {c.models.encoder, ModelRole::encoder, {}};
}
ModelHandle judge_handle(const RunConfig& c) {
  return {c.models.judge, ModelRole::judge, {}};
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.kind == "mock") {
    MockOptions opts;
    opts.embed_dim = config.embed_dim;
    return std::make_unique<MockBackend>(opts);
  }
  if (config.kind == "http") {
    HttpBackendOptions opts;
    opts.base_url = config.base_url;
    opts.api_key = config.api_key;
    opts.timeout = std::chrono::seconds(config.timeout_s);
    return std::make_unique<HttpBackend>(opts);
  }
  throw ConfigError("unknown backend kind: " + config.kind);
}

std::unique_ptr<Trainer> make_trainer(const TrainerConfig& config) {
  if (config.kind == "mock") {
    return std::make_unique<MockTrainer>();
  }
  if (config.kind == "http") {
    HttpTrainerOptions opts;
    opts.endpoint = config.endpoint;
    opts.api_key = config.api_key;
    opts.poll_interval = std::chrono::milliseconds(config.poll_interval_ms);
    opts.timeout = std::chrono::seconds(config.timeout_s);
    return std::make_unique<HttpTrainer>(opts);
  }
  throw ConfigError("unknown trainer kind: " + config.kind);
}

ClientOptions client_options(const BackendConfig& config) {
  ClientOptions o;
  o.retry = config.retry;
  o.max_in_flight = config.max_in_flight;
  o.single_flight = config.single_flight;
  return o;
}

}  // namespace cyclesynth
