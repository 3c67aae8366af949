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

#ifndef OVB_ELEMENT_REF_H_
#define OVB_ELEMENT_REF_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace ovb {

enum class ElementKind { kNode, kWay, kRelation, kArea, kDerived };

std::string_view element_kind_name(ElementKind kind);
// Unknown names map to kDerived.
ElementKind element_kind_from_name(std::string_view name);

// One OSM element in a query result. Derived rows (count outputs, CSV rows
// without an id) are keyed by their content in row_key.
struct ElementRef {
  ElementKind kind = ElementKind::kNode;
  std::int64_t id = 0;
  std::string row_key;

  friend bool operator==(const ElementRef&, const ElementRef&) = default;
  friend auto operator<=>(const ElementRef&, const ElementRef&) = default;
};

using ElementSet = std::set<ElementRef>;

// "node/123", "derived/<row key>".
std::string to_string(const ElementRef& ref);
std::optional<ElementRef> element_ref_from_string(std::string_view s);

}  // namespace ovb

#endif  // OVB_ELEMENT_REF_H_
