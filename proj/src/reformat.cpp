// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/reformat.hpp"

#include "cyclesynth/text.hpp"

namespace cyclesynth {

namespace {

ReformatResult reformat(const std::vector<Passage>& passages, TemplateId id,
                        const char* slot, RecordKind kind,
                        const ModelHandle& model, Client& client,
                        const PromptRegistry& prompts,
                        const GenerationParams& params) {
  if (model.role == ModelRole::encoder) {
    throw ValidationError("reformat needs a generation-capable handle");
  }
  std::vector<RenderedPrompt> rendered;
  rendered.reserve(passages.size());
  for (const auto& p : passages) {
    rendered.push_back(prompts.render(id, {{slot, p.text}}));
  }
  const auto outcomes = client.generate_batch(model, rendered, params);

  ReformatResult result;
  const std::string stage = std::string("reformat/") + to_string(id);
  for (std::size_t i = 0; i < passages.size(); ++i) {
    const auto& p = passages[i];
    if (!outcomes[i].ok()) {
      result.failures.push_back(make_failure(p.passage_id, stage, outcomes[i]));
      continue;
    }
    result.records.push_back({p.passage_id, kind,
                              std::string(text::trim(*outcomes[i].text)),
                              p.text, p.source});
  }
  return result;
}

}  // namespace

ReformatResult reformat_questions(const SegmentedCorpus& corpus,
                                  const ModelHandle& model, Client& client,
                                  const PromptRegistry& prompts,
                                  const GenerationParams& params) {
  return reformat(corpus.questions, TemplateId::reformat_prompter,
                  "instruction", RecordKind::instruction, model, client,
                  prompts, params);
}

ReformatResult reformat_answers(const SegmentedCorpus& corpus,
                                const ModelHandle& model, Client& client,
                                const PromptRegistry& prompts,
                                const GenerationParams& params) {
  return reformat(corpus.answers, TemplateId::reformat_assistant, "output",
                  RecordKind::response, model, client, prompts, params);
}

}  // namespace cyclesynth
