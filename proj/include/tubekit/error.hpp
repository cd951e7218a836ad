/* Copyright (c) 2026 The Tubekit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tubekit {

// Precondition violations throw std::invalid_argument. The types below cover
// the failures callers are expected to handle separately.

/// A box or tube fell entirely outside the frame after clamping.
class OutsideFrameError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed input file. `line()` is 1-based; 0 means "not line oriented".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                           ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Header of a record file names a schema or version this build does not read.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tubekit
