// Copyright 2026 The FedRE Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace fedre {

// Bad input: shape mismatches, invalid configs, malformed files.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values or other numeric breakdown at runtime.
// The CLI maps this to exit code 2.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed binary or text input; carries the offending byte offset or
// line number in the message.
class ParseError : public ValidationError {
 public:
  explicit ParseError(const std::string& what) : ValidationError(what) {}
};

}  // namespace fedre
