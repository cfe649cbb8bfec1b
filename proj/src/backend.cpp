// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/backend.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "cyclesynth/text.hpp"

namespace cyclesynth {

const char* to_string(ModelRole role) {
  switch (role) {
    case ModelRole::forward: return "forward";
    case ModelRole::backward: return "backward";
    case ModelRole::base: return "base";
    case ModelRole::judge: return "judge";
    case ModelRole::encoder: return "encoder";
  }
  return "unknown";
}

ModelRole model_role_from_string(std::string_view s) {
  for (ModelRole r : {ModelRole::forward, ModelRole::backward, ModelRole::base,
                      ModelRole::judge, ModelRole::encoder}) {
    if (s == to_string(r)) return r;
  }
  throw ValidationError("unknown model role: " + std::string(s));
}

Json to_json(const ModelHandle& h) {
  Json j;
  j["handle_id"] = h.handle_id;
  j["role"] = to_string(h.role);
  j["lineage"] = h.lineage;
  return j;
}

ModelHandle model_handle_from_json(const Json& j) {
  ModelHandle h;
  h.handle_id = j.at("handle_id").get<std::string>();
  h.role = model_role_from_string(j.at("role").get<std::string>());
  h.lineage = j.value("lineage", std::vector<std::string>{});
  return h;
}

ModelHandle derive_handle(const ModelHandle& base, ModelRole role) {
  return {base.handle_id, role, base.lineage};
}

void GenerationParams::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (top_k <= 0) throw ConfigError("top_k must be positive");
  if (max_new_tokens <= 0) throw ConfigError("max_new_tokens must be positive");
  if (max_model_len <= 0) throw ConfigError("max_model_len must be positive");
  if (max_new_tokens >= max_model_len) {
    throw ConfigError("max_new_tokens must be below max_model_len");
  }
}

Json to_json(const GenerationParams& p) {
  Json j;
  j["temperature"] = p.temperature;
  j["top_k"] = p.top_k;
  j["max_new_tokens"] = p.max_new_tokens;
  j["max_model_len"] = p.max_model_len;
  j["stop"] = p.stop;
  j["seed"] = p.seed ? Json(*p.seed) : Json(nullptr);
  return j;
}

GenerationParams generation_params_from_json(const Json& j) {
  GenerationParams p;
  p.temperature = j.value("temperature", p.temperature);
  p.top_k = j.value("top_k", p.top_k);
  p.max_new_tokens = j.value("max_new_tokens", p.max_new_tokens);
  p.max_model_len = j.value("max_model_len", p.max_model_len);
  p.stop = j.value("stop", std::vector<std::string>{});
  if (j.contains("seed") && !j["seed"].is_null()) {
    p.seed = j["seed"].get<std::int64_t>();
  }
  p.validate();
  return p;
}

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
  if (attempt <= 1) return std::chrono::milliseconds{0};
  const double ms = static_cast<double>(base_delay.count()) *
                    std::pow(multiplier, attempt - 2);
  return std::chrono::milliseconds{static_cast<long long>(
      std::min(ms, static_cast<double>(max_delay.count())))};
}

const std::string& GenerationOutcome::value() const {
  if (!text) {
    throw BackendError(failure.value_or(BackendFailure::rejected), message);
  }
  return *text;
}

Json to_json(const ClientCounters& c) {
  Json j;
  j["requests"] = c.requests;
  j["retries"] = c.retries;
  j["failures"] = c.failures;
  j["overflows"] = c.overflows;
  return j;
}

Client::Client(Backend& backend, ClientOptions options)
    : backend_(backend), options_(options) {
  if (options_.retry.max_attempts < 1) {
    throw ConfigError("retry.max_attempts must be >= 1");
  }
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
  if (options_.embed_chunk == 0) options_.embed_chunk = 64;
}

namespace {

std::string clean_completion(std::string completion, const std::string& prompt,
                             const std::vector<std::string>& stop) {
  if (!prompt.empty() && text::starts_with(completion, prompt)) {
    completion.erase(0, prompt.size());
  }
  std::size_t cut = completion.size();
  for (const auto& s : stop) {
    if (s.empty()) continue;
    cut = std::min(cut, completion.find(s));
  }
  completion.resize(std::min(cut, completion.size()));
  return completion;
}

}  // namespace

GenerationOutcome Client::generate(const ModelHandle& handle,
                                   const RenderedPrompt& prompt,
                                   const GenerationParams& params) {
  GenerationOutcome out;
  const std::size_t prompt_tokens = backend_.estimate_tokens(prompt.text);
  if (prompt_tokens + static_cast<std::size_t>(params.max_new_tokens) >
      static_cast<std::size_t>(params.max_model_len)) {
    ++overflows_;
    ++failures_;
    out.failure = BackendFailure::context_overflow;
    out.message = "prompt needs ~" + std::to_string(prompt_tokens) +
                  " tokens plus " + std::to_string(params.max_new_tokens) +
                  " new tokens, over max_model_len " +
                  std::to_string(params.max_model_len);
    return out;
  }

  for (int attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      ++retries_;
      std::this_thread::sleep_for(options_.retry.delay_before(attempt));
    }
    ++requests_;
    out.attempts = attempt;
    try {
      std::string raw = backend_.complete(handle, prompt, params);
      std::string cleaned = clean_completion(std::move(raw), prompt.text,
                                             params.stop);
      if (text::trim(cleaned).empty()) {
        throw BackendError(BackendFailure::empty_completion,
                           "empty completion");
      }
      out.text = std::move(cleaned);
      out.failure.reset();
      out.message.clear();
      return out;
    } catch (const BackendError& e) {
      out.failure = e.kind();
      out.message = e.what();
      if (!e.retryable()) break;
    }
  }
  ++failures_;
  return out;
}

std::vector<GenerationOutcome> Client::generate_batch(
    const ModelHandle& handle, const std::vector<RenderedPrompt>& prompts,
    const GenerationParams& params) {
  std::vector<GenerationOutcome> results(prompts.size());
  if (prompts.empty()) return results;

  const std::size_t workers =
      options_.single_flight
          ? 1
          : std::min<std::size_t>(options_.max_in_flight, prompts.size());
  if (workers == 1) {
    for (std::size_t i = 0; i < prompts.size(); ++i) {
      results[i] = generate(handle, prompts[i], params);
    }
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < prompts.size(); i = next++) {
        try {
          results[i] = generate(handle, prompts[i], params);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

std::vector<EmbeddingVector> Client::embed(const std::vector<std::string>& texts,
                                           const ModelHandle& encoder) {
  if (texts.empty()) throw ValidationError("embed: empty input");
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t begin = 0; begin < texts.size();
       begin += options_.embed_chunk) {
    const std::size_t end =
        std::min(texts.size(), begin + options_.embed_chunk);
    const std::vector<std::string> chunk(texts.begin() + begin,
                                         texts.begin() + end);
    std::vector<EmbeddingVector> got;
    for (int attempt = 1;; ++attempt) {
      if (attempt > 1) {
        ++retries_;
        std::this_thread::sleep_for(options_.retry.delay_before(attempt));
      }
      ++requests_;
      try {
        got = backend_.embed_batch(chunk, encoder);
        break;
      } catch (const BackendError& e) {
        if (!e.retryable() || attempt >= options_.retry.max_attempts) {
          ++failures_;
          throw;
        }
      }
    }
    if (got.size() != chunk.size()) {
      throw BackendError(BackendFailure::rejected,
                         "embedding count does not match input count");
    }
    for (auto& v : got) out.push_back(std::move(v));
  }
  for (const auto& v : out) {
    if (v.dim() == 0 || v.dim() != out.front().dim() ||
        v.encoder_id != out.front().encoder_id) {
      throw BackendError(BackendFailure::rejected,
                         "embeddings disagree on encoder or dimension");
    }
  }
  return out;
}

ClientCounters Client::counters() const {
  return {requests_.load(), retries_.load(), failures_.load(),
          overflows_.load()};
}

}  // namespace cyclesynth
