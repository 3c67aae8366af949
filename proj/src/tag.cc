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

#include "ovb/tag.h"

#include <array>
#include <utility>

#include "ovb/errors.h"
#include "ovb/lexer.h"
#include "ovb/text.h"

namespace ovb {
namespace {

constexpr std::array<std::pair<TagRelation, std::string_view>, 7> kSymbols = {{
    {TagRelation::kEquals, "="},
    {TagRelation::kNotEquals, "!="},
    {TagRelation::kExists, "exists"},
    {TagRelation::kNotExists, "!exists"},
    {TagRelation::kRegexValue, "~"},
    {TagRelation::kNotRegexValue, "!~"},
    {TagRelation::kRegexKeyValue, "~~"},
}};

}  // namespace

std::string_view relation_symbol(TagRelation relation) {
  for (const auto& [r, symbol] : kSymbols) {
    if (r == relation) return symbol;
  }
  return "=";
}

std::optional<TagRelation> relation_from_symbol(std::string_view symbol) {
  for (const auto& [r, s] : kSymbols) {
    if (s == symbol) return r;
  }
  return std::nullopt;
}

bool relation_has_value(TagRelation relation) {
  return relation != TagRelation::kExists &&
         relation != TagRelation::kNotExists;
}

std::string normalize_tag_text(std::string_view s) {
  return std::string(text::trim(text::nfc(s)));
}

Tag Tag::make(std::string_view key, TagRelation relation,
              std::optional<std::string_view> value) {
  std::string k = normalize_tag_text(key);
  if (k.empty()) throw ValidationError("tag key is empty");
  if (relation_has_value(relation) != value.has_value()) {
    throw ValidationError("tag value presence does not match relation " +
                          std::string(relation_symbol(relation)) +
                          " for key " + k);
  }
  std::optional<std::string> v;
  if (value) v = normalize_tag_text(*value);
  return Tag(std::move(k), relation, std::move(v));
}

std::string render_tag(const Tag& tag) {
  const std::string key = ql::quote(tag.key());
  const std::string value = ql::quote(tag.value().value_or(""));
  switch (tag.relation()) {
    case TagRelation::kExists:
      return "[" + key + "]";
    case TagRelation::kNotExists:
      return "[!" + key + "]";
    case TagRelation::kRegexKeyValue:
      return "[~" + key + "~" + value + "]";
    default:
      return "[" + key + std::string(relation_symbol(tag.relation())) + value +
             "]";
  }
}

nlohmann::json tag_to_json(const Tag& tag) {
  nlohmann::json j;
  j["key"] = tag.key();
  j["relation"] = relation_symbol(tag.relation());
  j["value"] = tag.value() ? nlohmann::json(*tag.value()) : nullptr;
  return j;
}

Tag tag_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("key") || !j["key"].is_string()) {
    throw ValidationError("tag row needs a string \"key\"");
  }
  std::optional<std::string> value;
  if (j.contains("value") && j["value"].is_string()) {
    value = j["value"].get<std::string>();
  }
  TagRelation relation =
      value ? TagRelation::kEquals : TagRelation::kExists;
  if (j.contains("relation") && j["relation"].is_string()) {
    const auto parsed = relation_from_symbol(j["relation"].get<std::string>());
    if (!parsed) {
      throw ValidationError("unknown tag relation " + j["relation"].dump());
    }
    relation = *parsed;
  }
  if (!relation_has_value(relation)) value.reset();
  return Tag::make(j["key"].get<std::string>(), relation,
                   value ? std::optional<std::string_view>(*value)
                         : std::nullopt);
}

}  // namespace ovb
