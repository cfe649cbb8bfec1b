// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/mock_backend.hpp"

#include "cyclesynth/text.hpp"

namespace cyclesynth {

std::size_t bigram_bucket(char32_t first, char32_t second, std::size_t dim) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char32_t cp : {first, second}) {
    const auto v = static_cast<std::uint32_t>(cp);
    for (int b = 0; b < 4; ++b) {
      h ^= (v >> (8 * b)) & 0xFFu;
      h *= 0x100000001b3ULL;
    }
  }
  return static_cast<std::size_t>(h % dim);
}

std::vector<double> bigram_embedding(std::string_view s, std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  const auto cps = text::decode_utf8(s);
  for (std::size_t i = 1; i < cps.size(); ++i) {
    v[bigram_bucket(cps[i - 1], cps[i], dim)] += 1.0;
  }
  return v;
}

MockBackend::MockBackend(MockOptions options) : options_(std::move(options)) {}

std::string MockBackend::forward_rule(std::string_view question) {
  return "A[" + std::string(question) + "]";
}

std::string MockBackend::backward_rule(std::string_view answer) {
  if (answer.size() >= 3 && text::starts_with(answer, "A[") &&
      text::ends_with(answer, "]")) {
    return std::string(answer.substr(2, answer.size() - 3));
  }
  return "Q[" + std::string(answer) + "]";
}

namespace {

void require_role(const ModelHandle& h, ModelRole role, TemplateId id) {
  if (h.role != role) {
    throw BackendError(BackendFailure::rejected,
                       std::string("mock: template ") + to_string(id) +
                           " expects a " + to_string(role) + " handle, got " +
                           to_string(h.role));
  }
}

}  // namespace

std::string MockBackend::complete(const ModelHandle& handle,
                                  const RenderedPrompt& prompt,
                                  const GenerationParams&) {
  const std::uint64_t call = calls_++;
  if (handle.handle_id.empty()) {
    throw BackendError(BackendFailure::rejected, "mock: unresolvable handle");
  }
  if (call < static_cast<std::uint64_t>(options_.transient_failures)) {
    throw BackendError(BackendFailure::unreachable, "mock: injected outage");
  }
  for (const auto& [slot, value] : prompt.bindings) {
    for (const auto& marker : options_.fail_substrings) {
      if (value.find(marker) != std::string::npos) return "";
    }
  }

  switch (prompt.template_id) {
    case TemplateId::reformat_prompter:
      return "Qr[" + prompt.sole_binding() + "]";
    case TemplateId::reformat_assistant:
      return "Ar[" + prompt.sole_binding() + "]";
    case TemplateId::pseudo_answer:
      require_role(handle, ModelRole::forward, prompt.template_id);
      return forward_rule(prompt.sole_binding());
    case TemplateId::pseudo_instruction:
      require_role(handle, ModelRole::backward, prompt.template_id);
      return backward_rule(prompt.sole_binding());
    case TemplateId::qa_judge: {
      require_role(handle, ModelRole::judge, prompt.template_id);
      if (!options_.judge_reply.empty()) return options_.judge_reply;
      const auto& a = prompt.bindings.at("answer");
      const auto& q = prompt.bindings.at("question");
      const bool consistent = a == forward_rule(q) || q == "Q[" + a + "]";
      return consistent ? "10" : "5";
    }
  }
  throw BackendError(BackendFailure::rejected, "mock: unknown template");
}

std::vector<EmbeddingVector> MockBackend::embed_batch(
    const std::vector<std::string>& texts, const ModelHandle& encoder) {
  if (encoder.handle_id.empty()) {
    throw BackendError(BackendFailure::rejected, "mock: unresolvable encoder");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    out.push_back({bigram_embedding(t, options_.embed_dim), encoder.handle_id});
  }
  return out;
}

}  // namespace cyclesynth
