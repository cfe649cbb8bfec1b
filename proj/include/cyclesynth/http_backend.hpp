// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <string>

#include "cyclesynth/backend.hpp"

namespace cyclesynth {

struct HttpBackendOptions {
  /// e.g. "http://127.0.0.1:8000"; an optional path prefix is kept.
  std::string base_url;
  std::string api_key;
  std::chrono::seconds timeout{120};
};

/// Chat-completion and embedding endpoints:
///   POST /v1/chat/completions {model, messages, temperature, top_k,
///                              max_tokens, stop, seed}
///   POST /v1/embeddings       {model, input}
/// The handle id is sent as the model name.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options);

  std::string complete(const ModelHandle& handle, const RenderedPrompt& prompt,
                       const GenerationParams& params) override;
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts,
                                           const ModelHandle& encoder) override;
  std::string name() const override { return "http"; }

  static Json chat_request(const ModelHandle& handle,
                           const RenderedPrompt& prompt,
                           const GenerationParams& params);

 private:
  Json post(const std::string& path, const Json& body);

  HttpBackendOptions options_;
  std::string origin_;
  std::string prefix_;
};

/// Splits "http://host:port/prefix" into origin and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& url);

}  // namespace cyclesynth
