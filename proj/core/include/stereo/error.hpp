// Copyright 2026 The STEREO Authors.
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

namespace stereo {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or hyperparameters (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file or record.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A rule pattern that does not compile or violates a rule invariant.
class RuleError : public Error {
 public:
  RuleError(const std::string& what, std::string rule_id, long position = -1)
      : Error(what), rule_id_(std::move(rule_id)), position_(position) {}

  const std::string& rule_id() const { return rule_id_; }
  // Offset into the pattern source, or -1 when not applicable.
  long position() const { return position_; }

 private:
  std::string rule_id_;
  long position_;
};

}  // namespace stereo
