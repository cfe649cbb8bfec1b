// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace cyclesynth {

// Insertion-ordered so every artifact is written with a stable key order.
using Json = nlohmann::ordered_json;

namespace jsonl {

std::vector<Json> read(const std::filesystem::path& path);

/// Serializes one object per line (UTF-8, LF, no trailing spaces).
std::string dump(const std::vector<Json>& rows);
std::string dump_one(const Json& value);

/// Writes through a temporary file and renames, so a crash never leaves a
/// half-written artifact that a resume would trust.
void write_atomic(const std::filesystem::path& path, std::string_view bytes);
void write(const std::filesystem::path& path, const std::vector<Json>& rows);
void write_json(const std::filesystem::path& path, const Json& value);

Json read_json(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);

}  // namespace jsonl
}  // namespace cyclesynth
