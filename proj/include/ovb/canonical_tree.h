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

#ifndef OVB_CANONICAL_TREE_H_
#define OVB_CANONICAL_TREE_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ovb/ast.h"

namespace ovb::ql {

// Structure-only view of a query. Labels name grammar roles ("query:way",
// "has-kv", "union", ...) and never carry set names, keys, values or other
// literals. Children keep source order.
struct CanonicalTree {
  std::string label;
  std::vector<CanonicalTree> children;

  std::size_t size() const;
  friend bool operator==(const CanonicalTree&, const CanonicalTree&) = default;
};

CanonicalTree canonical_tree(const QueryAst& ast);

// The tree used for a prediction that does not parse at all.
CanonicalTree unparsed_tree();

// {"label": ..., "children": [...]}
nlohmann::json tree_to_json(const CanonicalTree& tree);

// Bracket notation, e.g. "program(union(query:way(has-kv),output))".
std::string tree_to_string(const CanonicalTree& tree);
// Inverse of tree_to_string. Labels may not contain '(', ')' or ','.
CanonicalTree tree_from_string(std::string_view notation);

}  // namespace ovb::ql

#endif  // OVB_CANONICAL_TREE_H_
