// Copyright 2026 The ovb Authors
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

#ifndef OVB_ERRORS_H_
#define OVB_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ovb {

// Base of every error the library throws. The CLI maps ValidationError
// subclasses to exit code 1 and IoError subclasses to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class LexError : public ValidationError {
 public:
  LexError(std::size_t offset, const std::string& what)
      : ValidationError("lex error at offset " + std::to_string(offset) +
                        ": " + what),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class ParseError : public ValidationError {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected);
  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class ReportError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyKbError : public ValidationError {
 public:
  EmptyKbError() : ValidationError("knowledge base has no entries") {}
};

class DegenerateInput : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class PlanInfeasible : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class LeakageError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MissingBBox : public ValidationError {
 public:
  MissingBBox()
      : ValidationError("query contains {{bbox}} but no bbox was given") {}
};

class UnsupportedPlaceholder : public ValidationError {
 public:
  explicit UnsupportedPlaceholder(const std::string& placeholder)
      : ValidationError("unsupported template placeholder " + placeholder) {}
};

// Remote embedding provider unreachable, wrong dimension, or zero vector.
class ProviderError : public IoError {
 public:
  using IoError::IoError;
};

class GeneratorError : public IoError {
 public:
  using IoError::IoError;
};

class RefinerError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace ovb

#endif  // OVB_ERRORS_H_
