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

#ifndef OVB_PARSER_H_
#define OVB_PARSER_H_

#include <string>
#include <string_view>

#include "json.hpp"
#include "ovb/ast.h"
#include "ovb/tag.h"

namespace ovb::ql {

// Parses OverpassQL. Statements outside the supported grammar become kRaw
// nodes covering their source bytes; only unbalanced brackets, a malformed
// settings block, or a LexError make this throw (ParseError / LexError).
QueryAst parse(std::string_view source);

// Compact canonical rendering. parse(print(ast)) is structurally equal to
// ast.
std::string print(const QueryAst& ast);

// Deduplicated, normalized tags of every tag filter, plus tags recovered
// by scanning the text of raw nodes.
TagSet extract_tags(const QueryAst& ast);

// Bytes covered by raw statements (nested raw nodes counted once).
std::size_t raw_bytes(const QueryAst& ast);

// JSON view with stable field names (kind, children, span, ...).
nlohmann::json ast_to_json(const QueryAst& ast, bool include_spans = true);

// Equality ignoring source spans.
bool structurally_equal(const QueryAst& a, const QueryAst& b);

}  // namespace ovb::ql

#endif  // OVB_PARSER_H_
