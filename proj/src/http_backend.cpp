// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/http_backend.hpp"

#include "httplib.h"

namespace cyclesynth {

std::pair<std::string, std::string> split_base_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("base URL needs a scheme: " + url);
  }
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

HttpBackend::HttpBackend(HttpBackendOptions options)
    : options_(std::move(options)) {
  std::tie(origin_, prefix_) = split_base_url(options_.base_url);
}

Json HttpBackend::chat_request(const ModelHandle& handle,
                               const RenderedPrompt& prompt,
                               const GenerationParams& params) {
  Json body;
  body["model"] = handle.handle_id;
  Json msg;
  msg["role"] = "user";
  msg["content"] = prompt.text;
  body["messages"] = Json::array({msg});
  body["temperature"] = params.temperature;
  body["top_k"] = params.top_k;
  body["max_tokens"] = params.max_new_tokens;
  if (!params.stop.empty()) body["stop"] = params.stop;
  if (params.seed) body["seed"] = *params.seed;
  return body;
}

Json HttpBackend::post(const std::string& path, const Json& body) {
  httplib::Client cli(origin_);
  cli.set_connection_timeout(options_.timeout);
  cli.set_read_timeout(options_.timeout);
  cli.set_write_timeout(options_.timeout);
  httplib::Headers headers;
  if (!options_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + options_.api_key);
  }
  auto res = cli.Post(prefix_ + path, headers, body.dump(), "application/json");
  if (!res) {
    throw BackendError(BackendFailure::unreachable,
                       "POST " + path + ": " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw BackendError(BackendFailure::unreachable,
                       "POST " + path + ": HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw BackendError(BackendFailure::rejected,
                       "POST " + path + ": HTTP " + std::to_string(res->status) +
                           ": " + res->body);
  }
  try {
    return Json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw BackendError(BackendFailure::rejected,
                       "POST " + path + ": malformed reply: " + e.what());
  }
}

std::string HttpBackend::complete(const ModelHandle& handle,
                                  const RenderedPrompt& prompt,
                                  const GenerationParams& params) {
  const Json reply =
      post("/v1/chat/completions", chat_request(handle, prompt, params));
  try {
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return "";
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(BackendFailure::rejected,
                       std::string("chat reply missing content: ") + e.what());
  }
}

std::vector<EmbeddingVector> HttpBackend::embed_batch(
    const std::vector<std::string>& texts, const ModelHandle& encoder) {
  Json body;
  body["model"] = encoder.handle_id;
  body["input"] = texts;
  const Json reply = post("/v1/embeddings", body);
  std::vector<EmbeddingVector> out;
  try {
    for (const auto& item : reply.at("data")) {
      out.push_back({item.at("embedding").get<std::vector<double>>(),
                     encoder.handle_id});
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(BackendFailure::rejected,
                       std::string("embedding reply malformed: ") + e.what());
  }
  return out;
}

}  // namespace cyclesynth
