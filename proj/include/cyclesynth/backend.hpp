// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyclesynth/error.hpp"
#include "cyclesynth/jsonl.hpp"
#include "cyclesynth/prompts.hpp"

namespace cyclesynth {

enum class ModelRole { forward, backward, base, judge, encoder };

const char* to_string(ModelRole role);
ModelRole model_role_from_string(std::string_view s);

/// A servable model. Forward handles generate responses from instructions,
/// backward handles instructions from responses. `lineage` lists the
/// training jobs that produced the handle; base handles have none.
struct ModelHandle {
  std::string handle_id;
  ModelRole role = ModelRole::base;
  std::vector<std::string> lineage;

  bool operator==(const ModelHandle&) const = default;
};

Json to_json(const ModelHandle& h);
ModelHandle model_handle_from_json(const Json& j);

/// Same checkpoint as `base`, viewed in a new role.
ModelHandle derive_handle(const ModelHandle& base, ModelRole role);

struct GenerationParams {
  double temperature = 0.2;
  int top_k = 10;
  int max_new_tokens = 500;
  int max_model_len = 2048;
  std::vector<std::string> stop;
  std::optional<std::int64_t> seed;

  void validate() const;
};

Json to_json(const GenerationParams& p);
GenerationParams generation_params_from_json(const Json& j);

struct EmbeddingVector {
  std::vector<double> values;
  std::string encoder_id;

  std::size_t dim() const { return values.size(); }
};

/// Transport-level contract. One call is one attempt; retry, overflow checks
/// and output cleanup live in Client.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string complete(const ModelHandle& handle,
                               const RenderedPrompt& prompt,
                               const GenerationParams& params) = 0;

  virtual std::vector<EmbeddingVector> embed_batch(
      const std::vector<std::string>& texts, const ModelHandle& encoder) = 0;

  /// Rough token count used for context-budget checks (4 bytes per token).
  virtual std::size_t estimate_tokens(std::string_view text) const {
    return (text.size() + 3) / 4;
  }

  virtual std::string name() const = 0;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{200};
  double multiplier = 2.0;
  std::chrono::milliseconds max_delay{10'000};

  std::chrono::milliseconds delay_before(int attempt) const;
};

struct ClientOptions {
  RetryPolicy retry;
  std::size_t max_in_flight = 4;
  /// Deterministic replay: one request at a time.
  bool single_flight = false;
  std::size_t embed_chunk = 64;
};

struct GenerationOutcome {
  std::optional<std::string> text;
  std::optional<BackendFailure> failure;
  std::string message;
  int attempts = 0;

  bool ok() const { return text.has_value(); }
  /// Throws BackendError when the generation failed.
  const std::string& value() const;
};

struct ClientCounters {
  std::uint64_t requests = 0;
  std::uint64_t retries = 0;
  std::uint64_t failures = 0;
  std::uint64_t overflows = 0;
};

Json to_json(const ClientCounters& c);

class Client {
 public:
  Client(Backend& backend, ClientOptions options = {});

  /// Never returns an echo of the prompt; cuts the completion at the first
  /// stop sequence. Whitespace-only completions count as empty.
  GenerationOutcome generate(const ModelHandle& handle,
                             const RenderedPrompt& prompt,
                             const GenerationParams& params);

  /// Results are in input order regardless of completion order.
  std::vector<GenerationOutcome> generate_batch(
      const ModelHandle& handle, const std::vector<RenderedPrompt>& prompts,
      const GenerationParams& params);

  /// One vector per input, in order. Throws ValidationError on empty input
  /// and BackendError once retries are exhausted.
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     const ModelHandle& encoder);

  ClientCounters counters() const;
  const ClientOptions& options() const { return options_; }
  Backend& backend() { return backend_; }

 private:
  Backend& backend_;
  ClientOptions options_;
  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> retries_{0};
  std::atomic<std::uint64_t> failures_{0};
  std::atomic<std::uint64_t> overflows_{0};
};

}  // namespace cyclesynth
