// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "cyclesynth/corpus.hpp"
#include "cyclesynth/error.hpp"
#include "cyclesynth/text.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cyclesynth;
using testing_support::TempDir;

namespace {

std::vector<std::string> texts(const std::vector<Paragraph>& ps) {
  std::vector<std::string> out;
  for (const auto& p : ps) out.push_back(p.text);
  return out;
}

}  // namespace

TEST_CASE("split_paragraphs on blank lines") {
  CHECK(texts(split_paragraphs("A.\n\nB?")) ==
        std::vector<std::string>{"A.", "B?"});
  CHECK(split_paragraphs("  \n\n  ").empty());
  CHECK(split_paragraphs("").empty());
  CHECK(texts(split_paragraphs("L1\nL2\n\n\nL3")) ==
        std::vector<std::string>{"L1\nL2", "L3"});
}

TEST_CASE("split_paragraphs treats whitespace-only lines as blank") {
  CHECK(texts(split_paragraphs("a\n \t \nb")) ==
        std::vector<std::string>{"a", "b"});
  // U+3000 ideographic space on its own line.
  CHECK(texts(split_paragraphs("a\n\xE3\x80\x80\nb")) ==
        std::vector<std::string>{"a", "b"});
  CHECK(texts(split_paragraphs("a\r\n\r\nb")) ==
        std::vector<std::string>{"a", "b"});
}

TEST_CASE("split_paragraphs keeps interior whitespace and numbers in order") {
  const auto ps = split_paragraphs("\n\n  one  two \n  three\n\nfour\n");
  REQUIRE(ps.size() == 2);
  CHECK(ps[0].text == "one  two \n  three");
  CHECK(ps[0].ordinal == 0);
  CHECK(ps[1].ordinal == 1);
}

TEST_CASE("classify_passage") {
  CHECK(classify_passage("How do I fix it?") == PassageRole::question);
  CHECK(classify_passage("这是什么？") == PassageRole::question);
  CHECK(classify_passage("Boil the water first.") == PassageRole::answer);
  CHECK(classify_passage("Mid? sentence") == PassageRole::question);
}

TEST_CASE("segment_corpus counts and ids") {
  std::vector<RawDocument> docs = {
      {"a", "Why?\n\nBecause.", "s1"},
      {"b", "Plain.", "s1"},
      {"c", "Is it？\n\nYes.", "s2"},
  };
  const auto seg = segment_corpus(docs);
  CHECK(seg.n_questions() == 2);
  CHECK(seg.n_answers() == 3);
  CHECK(seg.questions[0].passage_id == "a#000000");
  CHECK(seg.answers[0].passage_id == "a#000001");
  CHECK(seg.questions[1].passage_id == "c#000000");
  CHECK(seg.per_source.at("s1").questions == 1);
  CHECK(seg.per_source.at("s1").answers == 2);
  CHECK(seg.per_source.at("s2").questions == 1);
}

TEST_CASE("segment_corpus rejects duplicate and empty documents") {
  try {
    segment_corpus({{"dup", "x", "s"}, {"dup", "y", "s"}});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("dup") != std::string::npos);
  }
  CHECK_THROWS_AS(segment_corpus({{"e", " \n\n ", "s"}}), ValidationError);
}

TEST_CASE("segmented corpus round-trips through JSONL") {
  TempDir dir;
  const auto seg = segment_corpus({{"d", "Q?\n\nA.\n\nB.", "src"}});
  write_segmented(dir / "seg.jsonl", seg);
  const auto back = read_segmented(dir / "seg.jsonl");
  REQUIRE(back.n_questions() == 1);
  REQUIRE(back.n_answers() == 2);
  CHECK(back.answers[1].text == "B.");
  CHECK(back.answers[1].passage_id == "d#000002");
  CHECK(back.per_source.at("src").answers == 2);
}

TEST_CASE("load_documents_dir uses sorted file names as ids") {
  TempDir dir;
  jsonl::write_atomic(dir / "b.txt", "second?");
  jsonl::write_atomic(dir / "a.txt", "first.");
  const auto docs = load_documents_dir(dir.path(), "plain");
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].doc_id == "a.txt");
  CHECK(docs[1].text == "second?");
  CHECK(docs[1].source == "plain");
}

TEST_CASE("partition, role soundness and determinism on random documents") {
  std::mt19937_64 gen(11);
  const std::vector<std::string> pieces = {
      "word", " ", "\n", "\n\n", "?", "？", ".", "\t", "  \n  \n", "é", "\r\n"};
  std::vector<RawDocument> docs;
  for (int d = 0; d < 300; ++d) {
    std::string t = "x";
    const int len = 1 + static_cast<int>(gen() % 30);
    for (int i = 0; i < len; ++i) t += pieces[gen() % pieces.size()];
    docs.push_back({"doc" + std::to_string(d), t, "fuzz"});
  }
  const auto seg = segment_corpus(docs);
  std::size_t expected = 0;
  for (const auto& d : docs) expected += split_paragraphs(d.text).size();
  CHECK(seg.n_questions() + seg.n_answers() == expected);
  for (const auto& p : seg.questions) {
    CHECK(text::contains_question_mark(p.text));
  }
  for (const auto& p : seg.answers) {
    CHECK_FALSE(text::contains_question_mark(p.text));
    CHECK_FALSE(text::trim(p.text).empty());
  }
  const auto again = segment_corpus(docs);
  REQUIRE(again.n_questions() == seg.n_questions());
  for (std::size_t i = 0; i < seg.questions.size(); ++i) {
    CHECK(again.questions[i].passage_id == seg.questions[i].passage_id);
    CHECK(again.questions[i].text == seg.questions[i].text);
  }
}
