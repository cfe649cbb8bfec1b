// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cyclesynth/backend.hpp"
#include "cyclesynth/jsonl.hpp"
#include "cyclesynth/prompts.hpp"
#include "cyclesynth/trainer.hpp"

namespace cyclesynth {

enum class RecordKind { instruction, response };

const char* to_string(RecordKind kind);

/// A standardized instruction or response. record_id is the passage id it
/// was rewritten from.
struct Record {
  std::string record_id;
  RecordKind kind = RecordKind::instruction;
  std::string text;
  std::string raw_text;
  std::string source;
};

Json to_json(const Record& r);
Record record_from_json(const Json& j);

struct StandardizedCorpus {
  std::vector<Record> instructions;
  std::vector<Record> responses;
};

void write_standardized(const std::filesystem::path& path,
                        const StandardizedCorpus& corpus);
/// Throws ValidationError on duplicate record ids or empty text.
StandardizedCorpus read_standardized(const std::filesystem::path& path);

/// A generation that did not produce a usable item.
struct StageFailure {
  std::string item_id;
  std::string stage;
  std::string reason;
  std::string message;
  int attempts = 0;
};

Json to_json(const StageFailure& f);
StageFailure stage_failure_from_json(const Json& j);
void write_failures(const std::filesystem::path& path,
                    const std::vector<StageFailure>& failures);
std::vector<StageFailure> read_failures(const std::filesystem::path& path);

StageFailure make_failure(std::string item_id, std::string stage,
                          const GenerationOutcome& outcome);

enum class GoldSide { instruction, response };
/// q_to_a: the response was generated from a gold instruction.
enum class PairDirection { q_to_a, a_to_q };

const char* to_string(GoldSide side);
const char* to_string(PairDirection dir);
GoldSide gold_side_from_string(std::string_view s);
PairDirection pair_direction_from_string(std::string_view s);

/// One gold side copied verbatim from its Record, one generated side stored
/// as the model returned it.
struct PseudoPair {
  std::string pair_id;
  std::string instruction;
  std::string response;
  GoldSide gold_side = GoldSide::instruction;
  int iteration = 1;
  PairDirection direction = PairDirection::q_to_a;
  std::string gold_record_id;

  const std::string& gold_text() const {
    return gold_side == GoldSide::instruction ? instruction : response;
  }
  const std::string& pseudo_text() const {
    return gold_side == GoldSide::instruction ? response : instruction;
  }
  /// Whitespace-trimmed pseudo side, used for training emission and
  /// reconstruction.
  std::string pseudo_trimmed() const;
};

std::string q_pair_id(std::string_view record_id);
std::string a_pair_id(std::string_view record_id);

/// Full pair (step artifacts).
Json to_json(const PseudoPair& p);
/// Dataset schema {instruction, response, gold_side, iteration, direction,
/// pair_id}.
Json to_dataset_json(const PseudoPair& p);
PseudoPair pseudo_pair_from_json(const Json& j);

void write_pairs(const std::filesystem::path& path,
                 const std::vector<PseudoPair>& pairs);
void write_dataset(const std::filesystem::path& path,
                   const std::vector<PseudoPair>& pairs);
std::vector<PseudoPair> read_pairs(const std::filesystem::path& path);

/// Builds an SFT job from pseudo pairs whose gold side is `gold`:
///   gold instruction -> backward job, input = pseudo_instruction framing of
///                       the pseudo response, target = gold instruction
///   gold response    -> forward job, input = pseudo_answer framing of the
///                       pseudo instruction, target = gold response
/// Throws ValidationError for an empty set, mixed gold sides or duplicate
/// pair ids.
TrainingJobSpec emit_training_job(const std::vector<PseudoPair>& pairs,
                                  GoldSide gold, const PromptRegistry& prompts,
                                  std::string job_id, const ModelHandle& base,
                                  const Hyperparameters& hyper);

void write_sft(const std::filesystem::path& path,
               const std::vector<SftExample>& examples);

}  // namespace cyclesynth
