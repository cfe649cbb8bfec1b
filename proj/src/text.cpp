// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#include "cyclesynth/text.hpp"

#include "cyclesynth/error.hpp"

namespace cyclesynth {

const char* to_string(BackendFailure kind) {
  switch (kind) {
    case BackendFailure::unreachable: return "unreachable";
    case BackendFailure::empty_completion: return "empty_completion";
    case BackendFailure::context_overflow: return "context_overflow";
    case BackendFailure::rejected: return "rejected";
  }
  return "unknown";
}

const char* to_string(TrainerFailure kind) {
  switch (kind) {
    case TrainerFailure::rejected: return "rejected";
    case TrainerFailure::job_failed: return "job_failed";
    case TrainerFailure::timeout: return "timeout";
    case TrainerFailure::unreachable: return "unreachable";
  }
  return "unknown";
}

namespace text {
namespace {

// Returns the code point at s[i] and its encoded length.
std::pair<char32_t, std::size_t> decode_one(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    return {0xFFFD, 1};
  }
  if (i + len > s.size()) return {0xFFFD, 1};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

// Encoded length of the code point that ends at s[end-1], or 0.
std::size_t last_char_len(std::string_view s, std::size_t end) {
  std::size_t start = end;
  while (start > 0 && end - start < 4) {
    --start;
    const auto b = static_cast<unsigned char>(s[start]);
    if ((b & 0xC0) != 0x80) break;
  }
  const auto [cp, len] = decode_one(s, start);
  (void)cp;
  return start + len == end ? len : 1;
}

}  // namespace

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const auto [cp, len] = decode_one(s, i);
    out.push_back(cp);
    i += len;
  }
  return out;
}

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

std::string_view trim(std::string_view s) {
  std::size_t begin = 0;
  while (begin < s.size()) {
    const auto [cp, len] = decode_one(s, begin);
    if (!is_unicode_space(cp)) break;
    begin += len;
  }
  std::size_t end = s.size();
  while (end > begin) {
    const std::size_t len = last_char_len(s, end);
    const auto [cp, got] = decode_one(s, end - len);
    if (got != len || !is_unicode_space(cp)) break;
    end -= len;
  }
  return s.substr(begin, end - begin);
}

bool contains_question_mark(std::string_view s) {
  // U+003F or U+FF1F (EF BC 9F).
  return s.find('?') != std::string_view::npos ||
         s.find("\xEF\xBC\x9F") != std::string_view::npos;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace text
}  // namespace cyclesynth
