/*
 * Copyright 2026 The alaska-lite Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace alaska {

// Base of every error raised by the runtime, allocator, IR tooling and pass.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller handed us a value outside the documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Use of a dead handle, out-of-bounds offset, double free.
class FaultError : public Error {
 public:
  using Error::Error;
};

// Handle table or heap exhausted, or an object larger than 4 GiB.
class AllocationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Broken internal contract, e.g. a pin slot index the pass never allocated.
class InternalError : public Error {
 public:
  using Error::Error;
};

// Malformed IR text. Carries the 1-based position of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// IR that parses but is not well formed: SSA, typing, dominance, CFG shape.
class VerifyError : public Error {
 public:
  using Error::Error;
};

// Input the transformation does not support, such as irreducible loops.
class PassError : public Error {
 public:
  using Error::Error;
};

}  // namespace alaska
