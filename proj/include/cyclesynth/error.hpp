// Copyright 2026 The cyclesynth Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace cyclesynth {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition or schema.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class BackendFailure {
  unreachable,       // transport or 5xx; retryable
  empty_completion,  // retryable up to the attempt cap
  context_overflow,  // never retried
  rejected,          // 4xx or malformed reply; never retried
};

const char* to_string(BackendFailure kind);

class BackendError : public Error {
 public:
  BackendError(BackendFailure kind, const std::string& what)
      : Error(what), kind_(kind) {}

  BackendFailure kind() const { return kind_; }
  bool retryable() const {
    return kind_ == BackendFailure::unreachable ||
           kind_ == BackendFailure::empty_completion;
  }

 private:
  BackendFailure kind_;
};

enum class TrainerFailure { rejected, job_failed, timeout, unreachable };

const char* to_string(TrainerFailure kind);

class TrainerError : public Error {
 public:
  TrainerError(TrainerFailure kind, const std::string& what)
      : Error(what), kind_(kind) {}

  TrainerFailure kind() const { return kind_; }

 private:
  TrainerFailure kind_;
};

}  // namespace cyclesynth
