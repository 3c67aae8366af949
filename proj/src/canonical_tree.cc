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

#include "ovb/canonical_tree.h"

#include <utility>

#include "ovb/errors.h"

namespace ovb::ql {
namespace {

CanonicalTree leaf(std::string label) { return CanonicalTree{std::move(label), {}}; }

std::string recursion_label(std::string_view op) {
  if (op == ">") return "recurse:down";
  if (op == ">>") return "recurse:down-rel";
  if (op == "<") return "recurse:up";
  return "recurse:up-rel";
}

std::string spatial_label(const SpatialFilter& f) {
  switch (f.kind) {
    case SpatialKind::kBBox: return "bbox-query";
    case SpatialKind::kAround: return "around";
    case SpatialKind::kAreaRef: return "area-query";
    case SpatialKind::kPlaceholder:
      return f.text == "{{bbox}}" ? "bbox-query" : "placeholder";
    case SpatialKind::kId: return "id-query";
    case SpatialKind::kIfCondition: return "filter";
    case SpatialKind::kOther: return "filter-other";
  }
  return "filter-other";
}

bool is_number(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if ((c < '0' || c > '9') && c != '.' && c != '-') return false;
  }
  return true;
}

CanonicalTree statement_tree(const Statement& st) {
  switch (st.kind) {
    case StatementKind::kQuery: {
      if (st.element_type.empty()) return leaf("set-ref");
      CanonicalTree t = leaf("query:" + st.element_type);
      if (!st.input_set.empty()) t.children.push_back(leaf("input-set"));
      for (const Filter& f : st.filters) {
        if (std::holds_alternative<TagFilter>(f)) {
          t.children.push_back(leaf("has-kv"));
        } else {
          t.children.push_back(leaf(spatial_label(std::get<SpatialFilter>(f))));
        }
      }
      return t;
    }
    case StatementKind::kUnion:
    case StatementKind::kDifference: {
      CanonicalTree t = leaf(st.kind == StatementKind::kUnion ? "union"
                                                              : "difference");
      for (const Statement& c : st.children) {
        t.children.push_back(statement_tree(c));
      }
      return t;
    }
    case StatementKind::kOutput: {
      CanonicalTree t = leaf("output");
      if (!st.input_set.empty()) t.children.push_back(leaf("input-set"));
      for (const std::string& m : st.modifiers) {
        if (!m.empty() && m.front() == '(') {
          t.children.push_back(leaf("bbox-query"));
        } else if (is_number(m)) {
          t.children.push_back(leaf("mod:limit"));
        } else {
          t.children.push_back(leaf("mod:" + m));
        }
      }
      return t;
    }
    case StatementKind::kRecursion: {
      CanonicalTree t = leaf(recursion_label(st.element_type));
      if (!st.input_set.empty()) t.children.push_back(leaf("input-set"));
      return t;
    }
    case StatementKind::kAssignment: {
      CanonicalTree t = leaf("assign");
      t.children.push_back(statement_tree(st.children.front()));
      return t;
    }
    case StatementKind::kForeach: {
      CanonicalTree t = leaf("foreach");
      for (const Statement& c : st.children) {
        t.children.push_back(statement_tree(c));
      }
      return t;
    }
    case StatementKind::kConditional: {
      CanonicalTree t = leaf("if");
      CanonicalTree then_branch = leaf("then");
      for (const Statement& c : st.children) {
        then_branch.children.push_back(statement_tree(c));
      }
      t.children.push_back(std::move(then_branch));
      if (st.has_else) {
        CanonicalTree else_branch = leaf("else");
        for (const Statement& c : st.else_children) {
          else_branch.children.push_back(statement_tree(c));
        }
        t.children.push_back(std::move(else_branch));
      }
      return t;
    }
    case StatementKind::kRaw:
      return leaf("raw");
  }
  return leaf("raw");
}

void write_tree(const CanonicalTree& t, std::string& out) {
  out += t.label;
  if (t.children.empty()) return;
  out.push_back('(');
  for (std::size_t i = 0; i < t.children.size(); ++i) {
    if (i > 0) out.push_back(',');
    write_tree(t.children[i], out);
  }
  out.push_back(')');
}

CanonicalTree read_tree(std::string_view s, std::size_t& pos) {
  CanonicalTree t;
  while (pos < s.size() && s[pos] != '(' && s[pos] != ')' && s[pos] != ',') {
    t.label.push_back(s[pos++]);
  }
  if (t.label.empty()) throw ValidationError("empty tree label");
  if (pos < s.size() && s[pos] == '(') {
    ++pos;
    while (true) {
      t.children.push_back(read_tree(s, pos));
      if (pos >= s.size()) throw ValidationError("unterminated tree");
      if (s[pos] == ')') {
        ++pos;
        break;
      }
      if (s[pos] != ',') throw ValidationError("malformed tree notation");
      ++pos;
    }
  }
  return t;
}

}  // namespace

std::size_t CanonicalTree::size() const {
  std::size_t n = 1;
  for (const CanonicalTree& c : children) n += c.size();
  return n;
}

CanonicalTree canonical_tree(const QueryAst& ast) {
  CanonicalTree root = leaf("program");
  if (!ast.settings.empty()) {
    CanonicalTree settings = leaf("settings");
    for (const Setting& s : ast.settings) {
      settings.children.push_back(leaf("setting:" + s.name));
    }
    root.children.push_back(std::move(settings));
  }
  for (const Statement& st : ast.statements) {
    root.children.push_back(statement_tree(st));
  }
  return root;
}

CanonicalTree unparsed_tree() { return leaf("raw"); }

nlohmann::json tree_to_json(const CanonicalTree& tree) {
  nlohmann::json children = nlohmann::json::array();
  for (const CanonicalTree& c : tree.children) {
    children.push_back(tree_to_json(c));
  }
  return {{"label", tree.label}, {"children", std::move(children)}};
}

std::string tree_to_string(const CanonicalTree& tree) {
  std::string out;
  write_tree(tree, out);
  return out;
}

CanonicalTree tree_from_string(std::string_view notation) {
  std::size_t pos = 0;
  CanonicalTree t = read_tree(notation, pos);
  if (pos != notation.size()) throw ValidationError("trailing tree notation");
  return t;
}

}  // namespace ovb::ql
