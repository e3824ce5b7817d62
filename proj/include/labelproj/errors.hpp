// Copyright 2026 The labelproj Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace labelproj {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input data (bad UTF-8, bad JSON line, bad Pharaoh pair).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A data-model invariant does not hold (span bounds, surface mismatch,
/// unknown role, alignment/token mismatch).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Prompt template problems: required placeholder missing or an unknown
/// placeholder left unresolved.
class TemplateError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Transport or protocol failure talking to a translation/completion
/// backend. Carries the cache key digest of the failed request when known.
class BackendError : public Error {
 public:
  explicit BackendError(const std::string& msg, std::string key_digest = "")
      : Error(msg), key_digest_(std::move(key_digest)) {}
  const std::string& key_digest() const { return key_digest_; }

 private:
  std::string key_digest_;
};

/// Strict replay mode and the key is not in the cache.
class CacheMissError : public BackendError {
 public:
  using BackendError::BackendError;
};

/// Completion reduced to an empty string after stripping.
class EmptyCandidateError : public Error {
 public:
  using Error::Error;
};

/// In-context example pool exhausted before enough candidates passed
/// both acceptance checks.
class InsufficientExamplesError : public Error {
 public:
  InsufficientExamplesError(const std::string& msg, int accepted, int requested)
      : Error(msg), accepted_(accepted), requested_(requested) {}
  int accepted() const { return accepted_; }
  int requested() const { return requested_; }

 private:
  int accepted_;
  int requested_;
};

}  // namespace labelproj
