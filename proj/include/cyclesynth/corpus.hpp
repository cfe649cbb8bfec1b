// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cyclesynth/jsonl.hpp"

namespace cyclesynth {

struct RawDocument {
  std::string doc_id;
  std::string text;
  std::string source;
};

enum class PassageRole { question, answer };

const char* to_string(PassageRole role);
PassageRole passage_role_from_string(std::string_view s);

/// A trimmed paragraph before classification.
struct Paragraph {
  std::size_t ordinal = 0;
  std::string text;
};

struct Passage {
  std::string passage_id;
  std::string text;
  PassageRole role = PassageRole::answer;
  std::string source;
};

struct SourceCounts {
  std::size_t questions = 0;
  std::size_t answers = 0;
};

struct SegmentedCorpus {
  std::vector<Passage> questions;
  std::vector<Passage> answers;
  std::map<std::string, SourceCounts> per_source;

  std::size_t n_questions() const { return questions.size(); }
  std::size_t n_answers() const { return answers.size(); }
};

/// Paragraphs are maximal runs of lines separated by one or more blank lines
/// (a blank line is one whose trimmed content is empty).
std::vector<Paragraph> split_paragraphs(std::string_view text);

/// Question iff the text holds "?" or the full-width "？".
PassageRole classify_passage(std::string_view text);

/// `doc_id + "#" + ordinal` zero-padded to six digits.
std::string make_passage_id(std::string_view doc_id, std::size_t ordinal);

/// Throws ValidationError on duplicate doc ids or documents that are empty
/// after trimming. Documents are processed in parallel and merged in input
/// order.
SegmentedCorpus segment_corpus(const std::vector<RawDocument>& docs);

// File formats.
std::vector<RawDocument> load_documents_jsonl(const std::filesystem::path& path);
/// Every regular file in `dir` is one document (doc_id = filename), in
/// lexicographic filename order.
std::vector<RawDocument> load_documents_dir(const std::filesystem::path& dir,
                                            const std::string& source);

Json to_json(const Passage& p);
Passage passage_from_json(const Json& j);

void write_segmented(const std::filesystem::path& path,
                     const SegmentedCorpus& corpus);
SegmentedCorpus read_segmented(const std::filesystem::path& path);

}  // namespace cyclesynth
