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


#include <string>

#include "doctest.h"
#include "ovb/canonical_tree.h"
#include "ovb/errors.h"
#include "ovb/lexer.h"
#include "ovb/parser.h"
#include "synthetic.h"

namespace ql = ovb::ql;

namespace {

const char* kGt =
    "[out:csv(::count)][timeout:240];(way[\"area\"=\"yes\"][\"highway\"="
    "\"unclassified\"][\"place\"=\"square\"](if:is_closed());relation[\"type\"="
    "\"multipolygon\"][\"highway\"=\"unclassified\"][\"place\"=\"square\"];);"
    "out count;";

bool has_raw(const std::vector<ql::Statement>& statements) {
  for (const auto& s : statements) {
    if (s.kind == ql::StatementKind::kRaw) return true;
    if (has_raw(s.children) || has_raw(s.else_children)) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("lexer") {
  TEST_CASE("token kinds of a small query") {
    const auto tokens = ql::tokenize("node[\"amenity\"=\"cafe\"]({{bbox}});out;");
    REQUIRE(tokens.size() == 12);
    CHECK(tokens[0].kind == ql::TokenKind::kIdent);
    CHECK(tokens[1].kind == ql::TokenKind::kBracketOpen);
    CHECK(tokens[2].kind == ql::TokenKind::kStringLiteral);
    CHECK(tokens[3].kind == ql::TokenKind::kOperator);
    CHECK(tokens[7].kind == ql::TokenKind::kTemplatePlaceholder);
    CHECK(tokens[7].text == "{{bbox}}");
    CHECK(tokens.back().kind == ql::TokenKind::kSemicolon);
  }

  TEST_CASE("spans are byte offsets into the source") {
    const std::string src = "node[name=\"Zürich\"];";
    for (const auto& t : ql::tokenize(src)) {
      CHECK(src.substr(t.span.start, t.span.size()) == t.text);
    }
  }

  TEST_CASE("detokenize is lossless on the fixture corpus") {
    for (const auto& [id, q] : ovb::testing::fixture_queries()) {
      CAPTURE(id);
      CHECK(ql::detokenize(ql::tokenize(q), q) == q);
    }
  }

  TEST_CASE("comments survive as tokens") {
    const auto tokens = ql::tokenize("/* a */ node; // b\nout;");
    int comments = 0;
    for (const auto& t : tokens) comments += t.kind == ql::TokenKind::kComment;
    CHECK(comments == 2);
  }

  TEST_CASE("recursion operators") {
    const auto tokens = ql::tokenize(">;>>;<;<<;");
    CHECK(tokens[0].kind == ql::TokenKind::kRecursionOp);
    CHECK(tokens[2].text == ">>");
    CHECK(tokens[6].text == "<<");
  }

  TEST_CASE("unterminated string reports its offset") {
    try {
      ql::tokenize("node[\"amenity");
      FAIL("expected LexError");
    } catch (const ovb::LexError& e) {
      CHECK(e.offset() == 5);
    }
  }

  TEST_CASE("quote and unquote are inverse") {
    for (std::string s : {"plain", "with \"quotes\"", "back\\slash", "東京",
                          "tab\there"}) {
      CHECK(ql::unquote(ql::quote(s)) == s);
    }
    CHECK(ql::unquote("'single'") == "single");
  }
}

TEST_SUITE("parser") {
  TEST_CASE("malformed filter names the expected token") {
    try {
      ql::parse("node[;");
      FAIL("expected ParseError");
    } catch (const ovb::ParseError& e) {
      CHECK(e.offset() == 5);
      CHECK(std::string(e.what()) == "parse error at offset 5: expected ']'");
    }
  }

  TEST_CASE("print is idempotent on the fixture corpus") {
    for (const auto& [id, q] : ovb::testing::fixture_queries()) {
      CAPTURE(id);
      const std::string once = ql::print(ql::parse(q));
      CHECK(ql::print(ql::parse(once)) == once);
      CHECK(ql::structurally_equal(ql::parse(q), ql::parse(once)));
    }
  }

  TEST_CASE("formatting does not change structure") {
    const auto a = ql::parse("node[amenity=cafe]({{bbox}});out;");
    const auto b = ql::parse("node\n  [\"amenity\" = \"cafe\"]\n  ({{bbox}});\nout ;");
    CHECK(ql::structurally_equal(a, b));
    CHECK(ql::print(a) == ql::print(b));
  }

  TEST_CASE("tag filters of the square query") {
    const auto tags = ql::extract_tags(ql::parse(kGt));
    CHECK(tags.size() == 4);
    CHECK(tags.count(ovb::Tag::make("place", ovb::TagRelation::kEquals,
                                    "square")) == 1);
    CHECK(tags.count(ovb::Tag::make("type", ovb::TagRelation::kEquals,
                                    "multipolygon")) == 1);
  }

  TEST_CASE("canonical tree drops identifiers and tag contents") {
    CHECK(ql::tree_to_string(ql::canonical_tree(ql::parse(kGt))) ==
          "program(settings(setting:out,setting:timeout),union(query:way("
          "has-kv,has-kv,has-kv,filter),query:relation(has-kv,has-kv,has-kv)),"
          "output(mod:count))");
    const auto a = ql::canonical_tree(ql::parse("node[a=b]->.x;.x out;"));
    const auto b = ql::canonical_tree(ql::parse("node[c=d]->.y;.y out;"));
    CHECK(a == b);
  }

  TEST_CASE("tree notation round-trips") {
    const auto t = ql::canonical_tree(ql::parse(kGt));
    CHECK(ql::tree_from_string(ql::tree_to_string(t)) == t);
  }

  TEST_CASE("unsupported constructs fall back to raw statements") {
    const auto ast = ql::parse("make stat count=count(nodes);out;");
    REQUIRE(ast.statements.size() == 2);
    CHECK(ast.statements[0].kind == ql::StatementKind::kRaw);
    CHECK(ql::raw_bytes(ast) > 0);
  }

  TEST_CASE("tags inside raw statements are still found") {
    const auto ast =
        ql::parse("retro(\"2019-01-01T00:00:00Z\") { node[amenity=cafe](1,2,3,4); out; }");
    CHECK(has_raw(ast.statements));
    CHECK(ql::extract_tags(ast).count(ovb::Tag::make(
              "amenity", ovb::TagRelation::kEquals, "cafe")) == 1);
  }

  TEST_CASE("structural statements are recognised") {
    const auto ast = ql::parse(
        "area[name=Berlin]->.a;(node(area.a)[shop]; - node[shop=bakery];);"
        "foreach->.x(node(around.x:50);out;);if (count(nodes) > 1) {out;} "
        "else {out count;}>;");
    REQUIRE(ast.statements.size() == 5);
    CHECK(ast.statements[0].kind == ql::StatementKind::kAssignment);
    CHECK(ast.statements[1].kind == ql::StatementKind::kDifference);
    CHECK(ast.statements[2].kind == ql::StatementKind::kForeach);
    CHECK(ast.statements[3].kind == ql::StatementKind::kConditional);
    CHECK(ast.statements[3].has_else);
    CHECK(ast.statements[4].kind == ql::StatementKind::kRecursion);
  }

  TEST_CASE("negation, regex and case-insensitive filters") {
    const auto ast = ql::parse(
        "node[!\"name\"][\"highway\"!~\"foot\"][name~\"^st\",i][~\"^addr\"~\".\"];");
    const auto& f = ast.statements.at(0).filters;
    REQUIRE(f.size() == 4);
    CHECK(std::get<ql::TagFilter>(f[0]).relation == ovb::TagRelation::kNotExists);
    CHECK(std::get<ql::TagFilter>(f[1]).relation ==
          ovb::TagRelation::kNotRegexValue);
    CHECK(std::get<ql::TagFilter>(f[2]).case_insensitive);
    CHECK(std::get<ql::TagFilter>(f[3]).relation ==
          ovb::TagRelation::kRegexKeyValue);
  }

  TEST_CASE("synthetic corpus never hard-fails") {
    for (const auto& q : ovb::testing::overpass_corpus(300, 7)) {
      CAPTURE(q);
      CHECK_NOTHROW(ql::parse(q));
    }
  }

  TEST_CASE("ast json carries spans on request") {
    const auto ast = ql::parse("node[a=b];out;");
    const auto with = ql::ast_to_json(ast, true);
    const auto without = ql::ast_to_json(ast, false);
    CHECK(with.dump().find("span") != std::string::npos);
    CHECK(without.dump().find("span") == std::string::npos);
  }
}
