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

#include "ovb/element_ref.h"

#include <charconv>

namespace ovb {

std::string_view element_kind_name(ElementKind kind) {
  switch (kind) {
    case ElementKind::kNode: return "node";
    case ElementKind::kWay: return "way";
    case ElementKind::kRelation: return "relation";
    case ElementKind::kArea: return "area";
    case ElementKind::kDerived: return "derived";
  }
  return "derived";
}

ElementKind element_kind_from_name(std::string_view name) {
  if (name == "node") return ElementKind::kNode;
  if (name == "way") return ElementKind::kWay;
  if (name == "relation") return ElementKind::kRelation;
  if (name == "area") return ElementKind::kArea;
  return ElementKind::kDerived;
}

std::string to_string(const ElementRef& ref) {
  std::string out(element_kind_name(ref.kind));
  out.push_back('/');
  if (ref.kind == ElementKind::kDerived && !ref.row_key.empty()) {
    out += ref.row_key;
  } else {
    out += std::to_string(ref.id);
  }
  return out;
}

std::optional<ElementRef> element_ref_from_string(std::string_view s) {
  const std::size_t slash = s.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  ElementRef ref;
  ref.kind = element_kind_from_name(s.substr(0, slash));
  const std::string_view rest = s.substr(slash + 1);
  std::int64_t id = 0;
  const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), id);
  if (ec == std::errc() && ptr == rest.data() + rest.size()) {
    ref.id = id;
  } else if (ref.kind == ElementKind::kDerived) {
    ref.row_key = std::string(rest);
  } else {
    return std::nullopt;
  }
  return ref;
}

}  // namespace ovb
