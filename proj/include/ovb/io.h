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


#ifndef OVB_IO_H_
#define OVB_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ovb::io {

// Throws IoError naming the path when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

// One JSON value per non-blank line. Throws ValidationError with the line
// number on malformed rows.
std::vector<nlohmann::json> parse_jsonl(std::string_view contents,
                                        std::string_view origin = "input");
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

// Reads a file, or standard input for "-".
std::string read_file_or_stdin(const std::string& path);

// Required string field of a JSONL row.
std::string string_field(const nlohmann::json& row, std::string_view name,
                         std::string_view origin);

}  // namespace ovb::io

#endif  // OVB_IO_H_
