// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/dataset.hpp"

#include <filesystem>
#include <unordered_set>

#include "cyclesynth/error.hpp"
#include "cyclesynth/text.hpp"

namespace cyclesynth {

const char* to_string(RecordKind kind) {
  return kind == RecordKind::instruction ? "instruction" : "response";
}

Json to_json(const Record& r) {
  Json j;
  j["record_id"] = r.record_id;
  j["kind"] = to_string(r.kind);
  j["text"] = r.text;
  j["raw_text"] = r.raw_text;
  j["source"] = r.source;
  return j;
}

Record record_from_json(const Json& j) {
  Record r;
  r.record_id = j.at("record_id").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "instruction") {
    r.kind = RecordKind::instruction;
  } else if (kind == "response") {
    r.kind = RecordKind::response;
  } else {
    throw ValidationError("unknown record kind: " + kind);
  }
  r.text = j.at("text").get<std::string>();
  r.raw_text = j.value("raw_text", std::string());
  r.source = j.value("source", std::string("unknown"));
  if (r.text.empty()) throw ValidationError("empty record " + r.record_id);
  return r;
}

void write_standardized(const std::filesystem::path& path,
                        const StandardizedCorpus& corpus) {
  std::vector<Json> rows;
  for (const auto& r : corpus.instructions) rows.push_back(to_json(r));
  for (const auto& r : corpus.responses) rows.push_back(to_json(r));
  jsonl::write(path, rows);
}

StandardizedCorpus read_standardized(const std::filesystem::path& path) {
  StandardizedCorpus corpus;
  std::unordered_set<std::string> ids;
  for (const auto& row : jsonl::read(path)) {
    Record r = record_from_json(row);
    if (!ids.insert(r.record_id).second) {
      throw ValidationError("duplicate record_id: " + r.record_id);
    }
    (r.kind == RecordKind::instruction ? corpus.instructions : corpus.responses)
        .push_back(std::move(r));
  }
  return corpus;
}

Json to_json(const StageFailure& f) {
  Json j;
  j["item_id"] = f.item_id;
  j["stage"] = f.stage;
  j["reason"] = f.reason;
  j["message"] = f.message;
  j["attempts"] = f.attempts;
  return j;
}

StageFailure stage_failure_from_json(const Json& j) {
  return {j.at("item_id").get<std::string>(), j.at("stage").get<std::string>(),
          j.at("reason").get<std::string>(), j.value("message", std::string()),
          j.value("attempts", 0)};
}

void write_failures(const std::filesystem::path& path,
                    const std::vector<StageFailure>& failures) {
  std::vector<Json> rows;
  for (const auto& f : failures) rows.push_back(to_json(f));
  jsonl::write(path, rows);
}

std::vector<StageFailure> read_failures(const std::filesystem::path& path) {
  std::vector<StageFailure> out;
  if (!std::filesystem::exists(path)) return out;
  for (const auto& row : jsonl::read(path)) {
    out.push_back(stage_failure_from_json(row));
  }
  return out;
}

StageFailure make_failure(std::string item_id, std::string stage,
                          const GenerationOutcome& outcome) {
  const BackendFailure kind =
      outcome.failure.value_or(BackendFailure::rejected);
  return {std::move(item_id), std::move(stage),
          kind == BackendFailure::context_overflow ? "context_overflow"
                                                   : "generation_failure",
          std::string(to_string(kind)) + ": " + outcome.message,
          outcome.attempts};
}

const char* to_string(GoldSide side) {
  return side == GoldSide::instruction ? "instruction" : "response";
}

const char* to_string(PairDirection dir) {
  return dir == PairDirection::q_to_a ? "q_to_a" : "a_to_q";
}

GoldSide gold_side_from_string(std::string_view s) {
  if (s == "instruction") return GoldSide::instruction;
  if (s == "response") return GoldSide::response;
  throw ValidationError("unknown gold_side: " + std::string(s));
}

PairDirection pair_direction_from_string(std::string_view s) {
  if (s == "q_to_a") return PairDirection::q_to_a;
  if (s == "a_to_q") return PairDirection::a_to_q;
  throw ValidationError("unknown direction: " + std::string(s));
}

std::string PseudoPair::pseudo_trimmed() const {
  return std::string(text::trim(pseudo_text()));
}

std::string q_pair_id(std::string_view record_id) {
  return "q:" + std::string(record_id);
}

std::string a_pair_id(std::string_view record_id) {
  return "a:" + std::string(record_id);
}

Json to_json(const PseudoPair& p) {
  Json j = to_dataset_json(p);
  j["gold_record_id"] = p.gold_record_id;
  return j;
}

Json to_dataset_json(const PseudoPair& p) {
  Json j;
  j["instruction"] = p.instruction;
  j["response"] = p.response;
  j["gold_side"] = to_string(p.gold_side);
  j["iteration"] = p.iteration;
  j["direction"] = to_string(p.direction);
  j["pair_id"] = p.pair_id;
  return j;
}

PseudoPair pseudo_pair_from_json(const Json& j) {
  PseudoPair p;
  p.pair_id = j.at("pair_id").get<std::string>();
  p.instruction = j.at("instruction").get<std::string>();
  p.response = j.at("response").get<std::string>();
  p.gold_side = gold_side_from_string(j.at("gold_side").get<std::string>());
  p.iteration = j.value("iteration", 1);
  p.direction = pair_direction_from_string(j.at("direction").get<std::string>());
  p.gold_record_id = j.value("gold_record_id", std::string());
  if (p.gold_record_id.empty() && p.pair_id.size() > 2) {
    p.gold_record_id = p.pair_id.substr(2);
  }
  const bool consistent =
      (p.gold_side == GoldSide::instruction) ==
      (p.direction == PairDirection::q_to_a);
  if (!consistent) {
    throw ValidationError("pair " + p.pair_id +
                          ": direction inconsistent with gold_side");
  }
  return p;
}

void write_pairs(const std::filesystem::path& path,
                 const std::vector<PseudoPair>& pairs) {
  std::vector<Json> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) rows.push_back(to_json(p));
  jsonl::write(path, rows);
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<PseudoPair>& pairs) {
  std::vector<Json> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) rows.push_back(to_dataset_json(p));
  jsonl::write(path, rows);
}

std::vector<PseudoPair> read_pairs(const std::filesystem::path& path) {
  std::vector<PseudoPair> out;
  for (const auto& row : jsonl::read(path)) {
    out.push_back(pseudo_pair_from_json(row));
  }
  return out;
}

TrainingJobSpec emit_training_job(const std::vector<PseudoPair>& pairs,
                                  GoldSide gold, const PromptRegistry& prompts,
                                  std::string job_id, const ModelHandle& base,
                                  const Hyperparameters& hyper) {
  if (pairs.empty()) {
    throw ValidationError("training job " + job_id + ": empty training set");
  }
  TrainingJobSpec job;
  job.job_id = std::move(job_id);
  job.direction =
      gold == GoldSide::instruction ? ModelRole::backward : ModelRole::forward;
  job.base = base;
  job.hyper = hyper;

  std::unordered_set<std::string_view> seen;
  job.examples.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.gold_side != gold) {
      throw ValidationError("pair " + p.pair_id + " has gold side " +
                            to_string(p.gold_side) + ", expected " +
                            to_string(gold));
    }
    if (!seen.insert(p.pair_id).second) {
      throw ValidationError("duplicate pair_id: " + p.pair_id);
    }
    const std::string pseudo = p.pseudo_trimmed();
    SftExample ex;
    ex.pair_id = p.pair_id;
    if (gold == GoldSide::instruction) {
      ex.input =
          prompts.render(TemplateId::pseudo_instruction, {{"output", pseudo}})
              .text;
    } else {
      ex.input =
          prompts.render(TemplateId::pseudo_answer, {{"instruction", pseudo}})
              .text;
    }
    ex.target = p.gold_text();
    job.examples.push_back(std::move(ex));
  }
  job.validate();
  return job;
}

void write_sft(const std::filesystem::path& path,
               const std::vector<SftExample>& examples) {
  std::vector<Json> rows;
  rows.reserve(examples.size());
  for (const auto& e : examples) rows.push_back(to_json(e));
  jsonl::write(path, rows);
}

}  // namespace cyclesynth
