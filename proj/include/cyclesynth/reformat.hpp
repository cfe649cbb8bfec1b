// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "cyclesynth/backend.hpp"
#include "cyclesynth/corpus.hpp"
#include "cyclesynth/dataset.hpp"
#include "cyclesynth/prompts.hpp"

namespace cyclesynth {

struct ReformatResult {
  std::vector<Record> records;
  std::vector<StageFailure> failures;
};

/// Rewrites every question passage through reformat_prompter. Passages whose
/// generation fails (including context overflow) are listed in `failures`
/// and left out of `records`; order follows the input passages.
ReformatResult reformat_questions(const SegmentedCorpus& corpus,
                                  const ModelHandle& model, Client& client,
                                  const PromptRegistry& prompts,
                                  const GenerationParams& params);

/// Same for answer passages through reformat_assistant.
ReformatResult reformat_answers(const SegmentedCorpus& corpus,
                                const ModelHandle& model, Client& client,
                                const PromptRegistry& prompts,
                                const GenerationParams& params);

}  // namespace cyclesynth
