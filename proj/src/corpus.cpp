// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

#include "cyclesynth/error.hpp"
#include "cyclesynth/text.hpp"

namespace cyclesynth {

namespace fs = std::filesystem;

const char* to_string(PassageRole role) {
  return role == PassageRole::question ? "question" : "answer";
}

PassageRole passage_role_from_string(std::string_view s) {
  if (s == "question") return PassageRole::question;
  if (s == "answer") return PassageRole::answer;
  throw ValidationError("unknown passage role: " + std::string(s));
}

std::vector<Paragraph> split_paragraphs(std::string_view text) {
  std::vector<Paragraph> out;
  std::size_t para_begin = std::string_view::npos;
  std::size_t para_end = 0;

  auto flush = [&] {
    if (para_begin == std::string_view::npos) return;
    const std::string_view body =
        text::trim(text.substr(para_begin, para_end - para_begin));
    if (!body.empty()) out.push_back({out.size(), std::string(body)});
    para_begin = std::string_view::npos;
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    if (text::trim(line).empty()) {
      flush();
    } else {
      if (para_begin == std::string_view::npos) para_begin = pos;
      para_end = nl;
    }
    pos = nl + 1;
  }
  flush();
  return out;
}

PassageRole classify_passage(std::string_view text) {
  return text::contains_question_mark(text) ? PassageRole::question
                                            : PassageRole::answer;
}

std::string make_passage_id(std::string_view doc_id, std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "#%06zu", ordinal);
  return std::string(doc_id) + buf;
}

SegmentedCorpus segment_corpus(const std::vector<RawDocument>& docs) {
  std::unordered_set<std::string_view> seen;
  for (const auto& doc : docs) {
    if (!seen.insert(doc.doc_id).second) {
      throw ValidationError("duplicate doc_id: " + doc.doc_id);
    }
    if (text::trim(doc.text).empty()) {
      throw ValidationError("empty document: " + doc.doc_id);
    }
  }

  std::vector<std::vector<Passage>> per_doc(docs.size());
  const auto n = static_cast<long>(docs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    const auto& doc = docs[static_cast<std::size_t>(i)];
    for (auto& para : split_paragraphs(doc.text)) {
      Passage p;
      p.passage_id = make_passage_id(doc.doc_id, para.ordinal);
      p.role = classify_passage(para.text);
      p.text = std::move(para.text);
      p.source = doc.source;
      per_doc[static_cast<std::size_t>(i)].push_back(std::move(p));
    }
  }

  SegmentedCorpus corpus;
  for (auto& passages : per_doc) {
    for (auto& p : passages) {
      auto& counts = corpus.per_source[p.source];
      if (p.role == PassageRole::question) {
        ++counts.questions;
        corpus.questions.push_back(std::move(p));
      } else {
        ++counts.answers;
        corpus.answers.push_back(std::move(p));
      }
    }
  }
  return corpus;
}

std::vector<RawDocument> load_documents_jsonl(const fs::path& path) {
  std::vector<RawDocument> docs;
  for (const auto& row : jsonl::read(path)) {
    if (!row.is_object() || !row.contains("doc_id") || !row.contains("text")) {
      throw ValidationError(path.string() +
                            ": document rows need doc_id and text");
    }
    RawDocument d;
    d.doc_id = row.at("doc_id").get<std::string>();
    d.text = row.at("text").get<std::string>();
    d.source = row.value("source", std::string("unknown"));
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<RawDocument> load_documents_dir(const fs::path& dir,
                                            const std::string& source) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RawDocument> docs;
  docs.reserve(files.size());
  for (const auto& f : files) {
    docs.push_back({f.filename().string(), jsonl::read_file(f), source});
  }
  return docs;
}

Json to_json(const Passage& p) {
  Json j;
  j["passage_id"] = p.passage_id;
  j["role"] = to_string(p.role);
  j["text"] = p.text;
  j["source"] = p.source;
  return j;
}

Passage passage_from_json(const Json& j) {
  Passage p;
  p.passage_id = j.at("passage_id").get<std::string>();
  p.role = passage_role_from_string(j.at("role").get<std::string>());
  p.text = j.at("text").get<std::string>();
  p.source = j.value("source", std::string("unknown"));
  if (p.text.empty()) throw ValidationError("empty passage " + p.passage_id);
  return p;
}

void write_segmented(const fs::path& path, const SegmentedCorpus& corpus) {
  std::vector<Json> rows;
  rows.reserve(corpus.questions.size() + corpus.answers.size());
  for (const auto& p : corpus.questions) rows.push_back(to_json(p));
  for (const auto& p : corpus.answers) rows.push_back(to_json(p));
  jsonl::write(path, rows);
}

SegmentedCorpus read_segmented(const fs::path& path) {
  SegmentedCorpus corpus;
  std::unordered_set<std::string> ids;
  for (const auto& row : jsonl::read(path)) {
    Passage p = passage_from_json(row);
    if (!ids.insert(p.passage_id).second) {
      throw ValidationError("duplicate passage_id: " + p.passage_id);
    }
    auto& counts = corpus.per_source[p.source];
    if (p.role == PassageRole::question) {
      ++counts.questions;
      corpus.questions.push_back(std::move(p));
    } else {
      ++counts.answers;
      corpus.answers.push_back(std::move(p));
    }
  }
  return corpus;
}

}  // namespace cyclesynth
