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


#include "doctest.h"
#include "ovb/errors.h"
#include "ovb/tag.h"

using ovb::Tag;
using ovb::TagRelation;

TEST_SUITE("tag") {
  TEST_CASE("make normalizes to NFC and trims") {
    // "e" followed by a combining acute accent.
    const Tag a = Tag::make("  name ", TagRelation::kEquals, "Cafe\xCC\x81");
    const Tag b = Tag::make("name", TagRelation::kEquals, "Caf\xC3\xA9");
    CHECK(a == b);
    CHECK(a.key() == "name");
  }

  TEST_CASE("value presence must match the relation") {
    CHECK_THROWS_AS(Tag::make("k", TagRelation::kExists, "v"),
                    ovb::ValidationError);
    CHECK_THROWS_AS(Tag::make("k", TagRelation::kEquals), ovb::ValidationError);
    CHECK_THROWS_AS(Tag::make(" ", TagRelation::kExists), ovb::ValidationError);
  }

  TEST_CASE("render and parse are inverse for every relation") {
    const Tag tags[] = {
        Tag::make("amenity", TagRelation::kEquals, "pub"),
        Tag::make("amenity", TagRelation::kNotEquals, "bar"),
        Tag::make("name", TagRelation::kExists),
        Tag::make("name", TagRelation::kNotExists),
        Tag::make("highway", TagRelation::kRegexValue, "^foot"),
        Tag::make("highway", TagRelation::kNotRegexValue, "path|track"),
        Tag::make("^name", TagRelation::kRegexKeyValue, "Berlin"),
        Tag::make("addr:street", TagRelation::kEquals, "Straße \"A\""),
    };
    for (const Tag& t : tags) {
      CAPTURE(ovb::render_tag(t));
      const auto back = ovb::parse_tag(ovb::render_tag(t));
      REQUIRE(back.has_value());
      CHECK(*back == t);
    }
  }

  TEST_CASE("parse_tag accepts unquoted filters") {
    const auto t = ovb::parse_tag("[amenity=pub]");
    REQUIRE(t.has_value());
    CHECK(*t == Tag::make("amenity", TagRelation::kEquals, "pub"));
    CHECK_FALSE(ovb::parse_tag("[a=b][c=d]").has_value());
    CHECK_FALSE(ovb::parse_tag("amenity=pub").has_value());
  }

  TEST_CASE("scan_tags finds filters in free text") {
    const auto tags = ovb::scan_tags(
        "try [\"craft\"=\"beekeeper\"] or maybe [shop] but not [!\"name\"]");
    CHECK(tags.size() == 3);
    CHECK(tags.count(Tag::make("craft", TagRelation::kEquals, "beekeeper")));
    CHECK(tags.count(Tag::make("shop", TagRelation::kExists)));
    CHECK(tags.count(Tag::make("name", TagRelation::kNotExists)));
  }

  TEST_CASE("json round trip and defaults") {
    const Tag t = Tag::make("shop", TagRelation::kNotEquals, "bakery");
    CHECK(ovb::tag_from_json(ovb::tag_to_json(t)) == t);
    CHECK(ovb::tag_from_json({{"key", "shop"}}) ==
          Tag::make("shop", TagRelation::kExists));
    CHECK(ovb::tag_from_json({{"key", "shop"}, {"value", "books"}}) ==
          Tag::make("shop", TagRelation::kEquals, "books"));
    CHECK_THROWS_AS(ovb::tag_from_json({{"key", "a"}, {"relation", "<>"}}),
                    ovb::ValidationError);
  }

  TEST_CASE("relation symbols") {
    for (auto r : {TagRelation::kEquals, TagRelation::kNotEquals,
                   TagRelation::kExists, TagRelation::kNotExists,
                   TagRelation::kRegexValue, TagRelation::kNotRegexValue,
                   TagRelation::kRegexKeyValue}) {
      CHECK(ovb::relation_from_symbol(ovb::relation_symbol(r)) == r);
    }
  }
}
