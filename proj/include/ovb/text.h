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

// Small UTF-8 and string helpers shared by every module.

#ifndef OVB_TEXT_H_
#define OVB_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ovb::text {

// Length in bytes of the UTF-8 sequence starting at s[pos], or 0 when the
// bytes there are not a well-formed sequence.
std::size_t utf8_sequence_length(std::string_view s, std::size_t pos);

// Offset of the first ill-formed byte, or nullopt for valid UTF-8.
std::optional<std::size_t> find_invalid_utf8(std::string_view s);

// Decodes to code points. Ill-formed bytes decode to U+FFFD one byte at a
// time so the function is total.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

// Byte offsets of every code point start, plus s.size() as a terminator.
std::vector<std::size_t> code_point_offsets(std::string_view s);

// Unicode NFC via ICU. Invalid UTF-8 is returned unchanged.
std::string nfc(std::string_view s);

std::string_view trim(std::string_view s);
// Trims and replaces every run of ASCII whitespace with one space.
std::string collapse_whitespace(std::string_view s);
std::string ascii_lower(std::string_view s);
bool is_space(char c);

// Hex-encoded SHA-256.
std::string sha256_hex(std::string_view data);

// FNV-1a, 64 bit. Stable across platforms, used for feature hashing.
std::uint64_t fnv1a64(std::string_view data);

bool starts_with(std::string_view s, std::string_view prefix);

}  // namespace ovb::text

#endif  // OVB_TEXT_H_
