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

#ifndef OVB_AST_H_
#define OVB_AST_H_

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ovb/lexer.h"
#include "ovb/tag.h"

namespace ovb::ql {

// Key and value hold unescaped content.
struct TagFilter {
  std::string key;
  TagRelation relation = TagRelation::kEquals;
  std::optional<std::string> value;
  bool case_insensitive = false;  // trailing ",i" on regex filters
  Span span;
};

enum class SpatialKind {
  kBBox,         // (s,w,n,e)
  kAround,       // (around:...)
  kAreaRef,      // (area), (area.a), (area:123)
  kPlaceholder,  // ({{bbox}}) and other templates
  kId,           // (123), (id:1,2)
  kIfCondition,  // (if: ...)
  kOther,        // (r.a), (user:...), (newer:...), ...
};

// Parenthesised filter. `text` is the compacted inner text, without the
// surrounding parentheses.
struct SpatialFilter {
  SpatialKind kind = SpatialKind::kOther;
  std::string text;
  Span span;
};

using Filter = std::variant<TagFilter, SpatialFilter>;

enum class StatementKind {
  kQuery,        // node/way/relation/area/nwr/... or a bare set reference
  kUnion,
  kDifference,
  kOutput,
  kRecursion,
  kAssignment,   // <statement>->.name; children holds the statement
  kForeach,
  kConditional,  // if (cond) { ... } else { ... }
  kRaw,          // anything the grammar does not cover, kept verbatim
};

struct Statement {
  StatementKind kind = StatementKind::kRaw;
  Span span;
  // Query: element type, empty for a bare ".set" reference.
  // Recursion: the operator (">", ">>", "<", "<<").
  std::string element_type;
  std::string input_set;             // ".name" input, without the dot
  std::string set_name;              // assignment target / foreach loop set
  std::vector<Filter> filters;       // query
  std::vector<std::string> modifiers;  // output
  std::string text;                  // raw text, or conditional expression
  std::vector<Statement> children;   // union/difference/assignment/bodies
  std::vector<Statement> else_children;
  bool has_else = false;
};

struct Setting {
  std::string name;
  std::vector<std::string> args;
  Span span;
};

struct QueryAst {
  std::vector<Setting> settings;
  Span settings_span;  // settings block including its ';', empty if none
  std::vector<Statement> statements;
  Span span;  // whole source
};

std::string_view statement_kind_name(StatementKind kind);
std::string_view spatial_kind_name(SpatialKind kind);

}  // namespace ovb::ql

#endif  // OVB_AST_H_
