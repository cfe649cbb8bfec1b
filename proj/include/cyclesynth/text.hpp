// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cyclesynth::text {

/// Decodes UTF-8 into code points. Malformed bytes decode to U+FFFD one byte
/// at a time so every input has a defined decoding.
std::vector<char32_t> decode_utf8(std::string_view s);

bool is_unicode_space(char32_t cp);

/// Strips leading and trailing Unicode whitespace; interior bytes untouched.
std::string_view trim(std::string_view s);

bool contains_question_mark(std::string_view s);

bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

}  // namespace cyclesynth::text
