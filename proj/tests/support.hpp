// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdlib>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cyclesynth/dataset.hpp"
#include "cyclesynth/jsonl.hpp"
#include "cyclesynth/prompts.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "cyclesynth-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline fs::path source_dir() { return fs::path(CYCLESYNTH_TEST_DATA); }

inline const cyclesynth::PromptRegistry& prompts() {
  static const auto reg =
      cyclesynth::PromptRegistry::load(CYCLESYNTH_TEMPLATE_DIR);
  return reg;
}

inline std::string slurp(const fs::path& p) {
  return cyclesynth::jsonl::read_file(p);
}

inline cyclesynth::Record make_record(const std::string& id,
                                      cyclesynth::RecordKind kind,
                                      const std::string& text) {
  return {id, kind, text, text, "test"};
}

/// N instructions "Qr[question i?]" and M responses "Ar[answer j.]", the
/// shape the mock reformat stage produces.
inline cyclesynth::StandardizedCorpus mock_corpus(std::size_t n_q,
                                                  std::size_t n_a) {
  cyclesynth::StandardizedCorpus c;
  for (std::size_t i = 0; i < n_q; ++i) {
    c.instructions.push_back(make_record(
        "dq" + std::to_string(i) + "#000000", cyclesynth::RecordKind::instruction,
        "Qr[question " + std::to_string(i) + "?]"));
  }
  for (std::size_t j = 0; j < n_a; ++j) {
    c.responses.push_back(make_record(
        "da" + std::to_string(j) + "#000000", cyclesynth::RecordKind::response,
        "Ar[answer " + std::to_string(j) + ".]"));
  }
  return c;
}

/// Byte map of every regular file under `dir`, keyed by relative path.
inline std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), dir).generic_string()] = slurp(e.path());
    }
  }
  return out;
}

}  // namespace testing_support
