// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/prompts.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "cyclesynth/error.hpp"
#include "cyclesynth/hash.hpp"
#include "cyclesynth/jsonl.hpp"
#include "cyclesynth/text.hpp"

namespace cyclesynth {

namespace {

constexpr std::string_view kOpen = "{{";
constexpr std::string_view kClose = "}}";

std::string marker(std::string_view slot) {
  return std::string(kOpen) + std::string(slot) + std::string(kClose);
}

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::string_view strip_space(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

const char* to_string(TemplateId id) {
  switch (id) {
    case TemplateId::reformat_prompter: return "reformat_prompter";
    case TemplateId::reformat_assistant: return "reformat_assistant";
    case TemplateId::pseudo_answer: return "pseudo_answer";
    case TemplateId::pseudo_instruction: return "pseudo_instruction";
    case TemplateId::qa_judge: return "qa_judge";
  }
  return "unknown";
}

TemplateId template_id_from_string(std::string_view name) {
  for (TemplateId id : kAllTemplates) {
    if (name == to_string(id)) return id;
  }
  throw ValidationError("unknown template id: " + std::string(name));
}

const std::string& RenderedPrompt::sole_binding() const {
  if (bindings.size() != 1) {
    throw ValidationError(std::string("template ") + to_string(template_id) +
                          " does not have exactly one slot");
  }
  return bindings.begin()->second;
}

PromptTemplate parse_template(std::string_view contents) {
  if (contents.find('\r') != std::string_view::npos) {
    throw ValidationError("template must use LF line endings");
  }
  if (!text::starts_with(contents, "---\n")) {
    throw ValidationError("template is missing front-matter");
  }
  std::size_t pos = 4;
  std::string id_name;
  std::vector<std::string> slots;
  bool closed = false;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    const std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    if (line == "---") {
      closed = true;
      break;
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw ValidationError("bad front-matter line: " + std::string(line));
    }
    const auto key = strip_space(line.substr(0, colon));
    const auto value = strip_space(line.substr(colon + 1));
    if (key == "id") {
      id_name = std::string(value);
    } else if (key == "slots") {
      std::size_t b = 0;
      while (b <= value.size()) {
        std::size_t e = value.find(',', b);
        if (e == std::string_view::npos) e = value.size();
        const auto slot = strip_space(value.substr(b, e - b));
        if (!slot.empty()) slots.emplace_back(slot);
        b = e + 1;
      }
    } else {
      throw ValidationError("unknown front-matter key: " + std::string(key));
    }
  }
  if (!closed) throw ValidationError("unterminated front-matter");
  if (id_name.empty()) throw ValidationError("template has no id");
  if (slots.empty()) throw ValidationError("template declares no slots");

  std::string_view body = pos <= contents.size() ? contents.substr(pos) : "";
  if (text::ends_with(body, "\n")) body.remove_suffix(1);

  PromptTemplate t{template_id_from_string(id_name), std::string(body),
                   std::move(slots), sha256_hex(contents)};

  std::set<std::string> unique(t.slots.begin(), t.slots.end());
  if (unique.size() != t.slots.size()) {
    throw ValidationError(id_name + ": duplicate slot declaration");
  }
  for (const auto& slot : t.slots) {
    if (count_occurrences(t.body, marker(slot)) != 1) {
      throw ValidationError(id_name + ": slot '" + slot +
                            "' must appear exactly once");
    }
  }
  if (count_occurrences(t.body, kOpen) != t.slots.size() ||
      count_occurrences(t.body, kClose) != t.slots.size()) {
    throw ValidationError(id_name + ": undeclared slot marker in body");
  }
  return t;
}

PromptRegistry PromptRegistry::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("template directory not found: " + dir.string());
  }
  PromptRegistry reg;
  for (TemplateId id : kAllTemplates) {
    const auto path = dir / (std::string(to_string(id)) + ".txt");
    if (!std::filesystem::exists(path)) {
      throw ConfigError("missing template file: " + path.string());
    }
    PromptTemplate t = parse_template(jsonl::read_file(path));
    if (t.id != id) {
      throw ConfigError(path.string() + ": front-matter id does not match");
    }
    reg.templates_.emplace(id, std::move(t));
  }
  return reg;
}

std::filesystem::path PromptRegistry::default_dir() {
  if (const char* env = std::getenv("CYCLESYNTH_TEMPLATES"); env && *env) {
    return env;
  }
  return CYCLESYNTH_TEMPLATE_DIR;
}

const PromptTemplate& PromptRegistry::get(TemplateId id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) {
    throw ValidationError(std::string("template not loaded: ") + to_string(id));
  }
  return it->second;
}

RenderedPrompt PromptRegistry::render(TemplateId id,
                                      const Bindings& bindings) const {
  const PromptTemplate& t = get(id);
  for (const auto& slot : t.slots) {
    const auto it = bindings.find(slot);
    if (it == bindings.end()) {
      throw ValidationError(std::string(to_string(id)) + ": missing slot '" +
                            slot + "'");
    }
    if (it->second.empty()) {
      throw ValidationError(std::string(to_string(id)) +
                            ": empty binding for slot '" + slot + "'");
    }
  }
  for (const auto& [name, value] : bindings) {
    if (std::find(t.slots.begin(), t.slots.end(), name) == t.slots.end()) {
      throw ValidationError(std::string(to_string(id)) + ": extra slot '" +
                            name + "'");
    }
  }

  // Single left-to-right pass so binding values are never rescanned for
  // markers.
  std::string out;
  out.reserve(t.body.size() + 256);
  std::size_t pos = 0;
  while (pos < t.body.size()) {
    const std::size_t open = t.body.find(kOpen, pos);
    if (open == std::string::npos) {
      out.append(t.body, pos, std::string::npos);
      break;
    }
    const std::size_t close = t.body.find(kClose, open);
    out.append(t.body, pos, open - pos);
    const std::string name =
        t.body.substr(open + kOpen.size(), close - open - kOpen.size());
    out += bindings.at(name);
    pos = close + kClose.size();
  }
  return {id, std::move(out), bindings};
}

RenderedPrompt PromptRegistry::render(std::string_view id,
                                      const Bindings& bindings) const {
  return render(template_id_from_string(id), bindings);
}

std::map<std::string, std::string> PromptRegistry::file_hashes() const {
  std::map<std::string, std::string> out;
  for (const auto& [id, t] : templates_) out[to_string(id)] = t.file_sha256;
  return out;
}

}  // namespace cyclesynth
