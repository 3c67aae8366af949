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

#ifndef OVB_TAG_H_
#define OVB_TAG_H_

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "json.hpp"

namespace ovb {

enum class TagRelation {
  kEquals,         // ["k"="v"]
  kNotEquals,      // ["k"!="v"]
  kExists,         // ["k"]
  kNotExists,      // [!"k"]
  kRegexValue,     // ["k"~"v"]
  kNotRegexValue,  // ["k"!~"v"]
  kRegexKeyValue,  // [~"k"~"v"]
};

// "=", "!=", "exists", "!exists", "~", "!~", "~~".
std::string_view relation_symbol(TagRelation relation);
std::optional<TagRelation> relation_from_symbol(std::string_view symbol);
bool relation_has_value(TagRelation relation);

// Canonical ("key", relation, "value") triple. Construct through make() so
// the NFC + trim normalization is always applied; equality and ordering are
// then plain component-wise comparisons.
class Tag {
 public:
  // Throws ValidationError when the key is empty or the value presence does
  // not match the relation.
  static Tag make(std::string_view key, TagRelation relation,
                  std::optional<std::string_view> value = std::nullopt);

  const std::string& key() const { return key_; }
  TagRelation relation() const { return relation_; }
  const std::optional<std::string>& value() const { return value_; }

  friend bool operator==(const Tag&, const Tag&) = default;
  friend std::strong_ordering operator<=>(const Tag&, const Tag&) = default;

 private:
  Tag(std::string key, TagRelation relation, std::optional<std::string> value)
      : key_(std::move(key)), relation_(relation), value_(std::move(value)) {}

  std::string key_;
  TagRelation relation_;
  std::optional<std::string> value_;
};

using TagSet = std::set<Tag>;

// NFC + surrounding-whitespace trim.
std::string normalize_tag_text(std::string_view s);

// ["key"="value"], ["key"], [!"key"], ["key"!~"v"], [~"k"~"v"], ...
std::string render_tag(const Tag& tag);

// Inverse of render_tag; also accepts unquoted keys/values such as
// [amenity=pub]. Returns nullopt for anything that is not one filter.
std::optional<Tag> parse_tag(std::string_view filter);

// Every ["k"(op)"v"]-shaped filter found anywhere in `text`. Used for
// constructs the parser keeps as raw nodes and for free-form model output.
TagSet scan_tags(std::string_view text);

// {"key":..., "relation":..., "value":...|null}
nlohmann::json tag_to_json(const Tag& tag);
// Accepts the same shape; a missing relation means "=" when a value is
// present and "exists" otherwise.
Tag tag_from_json(const nlohmann::json& j);

}  // namespace ovb

#endif  // OVB_TAG_H_
