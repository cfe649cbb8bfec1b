// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cyclesynth {

enum class TemplateId {
  reformat_prompter,
  reformat_assistant,
  pseudo_answer,
  pseudo_instruction,
  qa_judge,
};

inline constexpr std::array<TemplateId, 5> kAllTemplates = {
    TemplateId::reformat_prompter, TemplateId::reformat_assistant,
    TemplateId::pseudo_answer, TemplateId::pseudo_instruction,
    TemplateId::qa_judge};

const char* to_string(TemplateId id);
/// Throws ValidationError for unknown names.
TemplateId template_id_from_string(std::string_view name);

using Bindings = std::map<std::string, std::string>;

/// Slots are written `{{name}}` in the body; double braces never occur in the
/// transcribed prompt text.
struct PromptTemplate {
  TemplateId id;
  std::string body;
  std::vector<std::string> slots;
  std::string file_sha256;
};

struct RenderedPrompt {
  TemplateId template_id;
  std::string text;
  Bindings bindings;

  /// The single binding of one-slot templates.
  const std::string& sole_binding() const;
};

/// Parses the front-matter format:
///
///   ---
///   id: pseudo_answer
///   slots: instruction
///   ---
///   <body, LF line endings; the final newline of the file is not part of it>
PromptTemplate parse_template(std::string_view file_contents);

class PromptRegistry {
 public:
  /// Loads `<id>.txt` for every template id from `dir`.
  static PromptRegistry load(const std::filesystem::path& dir);

  /// Directory from $CYCLESYNTH_TEMPLATES, else the build-time default.
  static std::filesystem::path default_dir();

  const PromptTemplate& get(TemplateId id) const;

  /// Byte-exact substitution. Bindings must cover exactly the declared slots
  /// and be non-empty; values are neither escaped nor trimmed.
  RenderedPrompt render(TemplateId id, const Bindings& bindings) const;
  RenderedPrompt render(std::string_view id, const Bindings& bindings) const;

  std::map<std::string, std::string> file_hashes() const;

 private:
  std::map<TemplateId, PromptTemplate> templates_;
};

}  // namespace cyclesynth
