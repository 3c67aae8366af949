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

#include "ovb/errors.h"

namespace ovb {
namespace {

std::string describe(std::size_t offset,
                     const std::vector<std::string>& expected) {
  std::string msg = "parse error at offset " + std::to_string(offset);
  if (!expected.empty()) {
    msg += ": expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i > 0) msg += " or ";
      msg += "'" + expected[i] + "'";
    }
  }
  return msg;
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected)
    : ValidationError(describe(offset, expected)),
      offset_(offset),
      expected_(std::move(expected)) {}

}  // namespace ovb
