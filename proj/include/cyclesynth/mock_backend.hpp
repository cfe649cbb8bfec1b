// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cyclesynth/backend.hpp"

namespace cyclesynth {

/// Deterministic stand-in for a serving stack.
///
/// Generation rules by template:
///   reformat_prompter   raw -> "Qr[" raw "]"
///   reformat_assistant  raw -> "Ar[" raw "]"
///   pseudo_answer       q   -> "A[" q "]"
///   pseudo_instruction  a   -> inner text if a is "A[...]", else "Q[" a "]"
///   qa_judge            "10" when the pair is mock-consistent, else "5"
///
/// so backward(forward(q)) == q exactly. Embeddings are hashed code-point
/// bigram counts.
struct MockOptions {
  std::size_t embed_dim = 256;
  /// Prompts whose bindings contain any of these come back empty.
  std::vector<std::string> fail_substrings;
  /// The first N complete() calls fail as unreachable.
  int transient_failures = 0;
  /// Fixed judge reply, when set.
  std::string judge_reply;
};

class MockBackend : public Backend {
 public:
  explicit MockBackend(MockOptions options = {});

  std::string complete(const ModelHandle& handle, const RenderedPrompt& prompt,
                       const GenerationParams& params) override;
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts,
                                           const ModelHandle& encoder) override;
  std::string name() const override { return "mock"; }

  std::uint64_t complete_calls() const { return calls_.load(); }

  static std::string forward_rule(std::string_view question);
  static std::string backward_rule(std::string_view answer);

 private:
  MockOptions options_;
  std::atomic<std::uint64_t> calls_{0};
};

/// Bucket of the code-point bigram (first, second) in a `dim`-wide vector:
/// FNV-1a over the two code points as little-endian 32-bit words.
std::size_t bigram_bucket(char32_t first, char32_t second, std::size_t dim);

std::vector<double> bigram_embedding(std::string_view text, std::size_t dim);

}  // namespace cyclesynth
