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


#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "ovb/corpus.h"
#include "ovb/errors.h"
#include "ovb/random.h"
#include "ovb/text.h"
#include "synthetic.h"

using ovb::DataType;
using ovb::Tag;
using ovb::TagRelation;
namespace t = ovb::testing;

namespace {

std::string random_text(std::uint64_t seed) {
  static const std::vector<std::string> kPieces = {
      "a", "b", " ", "node", "[", "]", "=", "\"", "é", "東", "ß", "⟩", "⟨",
      "M", ";", "\n", "🙂", "1"};
  ovb::SeededRng rng(seed);
  const std::size_t n = 3 + rng.uniform_index(60);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    s += kPieces[rng.uniform_index(kPieces.size())];
  }
  // "⟨" followed by "M" would read as a sentinel.
  for (std::size_t p; (p = s.find("⟨M")) != std::string::npos;) s.erase(p, 3);
  return s;
}

ovb::Corpus build(const ovb::CorpusSources& src, std::uint64_t seed,
                  ovb::ExecPolicy policy = ovb::ExecPolicy::kParallel,
                  std::size_t total = 1000) {
  ovb::CorpusBuildOptions opts;
  opts.plan.total = total;
  opts.seed = seed;
  opts.policy = policy;
  return ovb::build_corpus(src, {}, opts);
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("sentinels") {
    CHECK(ovb::sentinel(1) == "⟨M1⟩");
    CHECK(ovb::sentinel(12) == "⟨M12⟩");
  }

  TEST_CASE("span corruption reconstructs the source") {
    for (std::uint64_t s = 0; s < 3000; ++s) {
      const std::string text = random_text(s);
      if (ovb::text::decode_utf8(text).size() < 3) continue;
      CAPTURE(text);
      const auto ex = ovb::emit_mlm(text, {}, s, DataType::kNl, s % 7);
      CHECK(ovb::reconstruct(ex) == text);
      CHECK(ex.input.find("⟨M1⟩") != std::string::npos);
    }
  }

  TEST_CASE("masked length follows the rate") {
    const std::string text(200, 'x');
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto ex = ovb::emit_mlm(text, {0.15, 3.0}, s);
      std::size_t masked = 0;
      for (char c : ex.target) masked += c == 'x';
      CHECK(masked == 30);
    }
    const auto ex = ovb::emit_mlm("abcd", {0.15, 3.0}, 0);
    CHECK(ex.target.size() - ovb::sentinel(1).size() == 1);
  }

  TEST_CASE("emission is keyed by seed and index") {
    const std::string text = "Cafes and bakeries near the old town square";
    const auto a = ovb::emit_mlm(text, {}, 5, DataType::kNl, 3);
    const auto b = ovb::emit_mlm(text, {}, 5, DataType::kNl, 3);
    CHECK(a.input == b.input);
    CHECK(a.target == b.target);
    bool differs = false;
    for (std::size_t i = 4; i < 20 && !differs; ++i) {
      differs = ovb::emit_mlm(text, {}, 5, DataType::kNl, i).input != a.input;
    }
    CHECK(differs);
    const auto j = ovb::example_to_json(a);
    CHECK(j["seed_trace"]["seed"] == 5);
    CHECK(j["seed_trace"]["index"] == 3);
  }

  TEST_CASE("degenerate inputs are rejected") {
    CHECK_THROWS_AS(ovb::emit_mlm("a", {}, 0), ovb::DegenerateInput);
    CHECK_THROWS_AS(ovb::emit_mlm("ab", {}, 0), ovb::DegenerateInput);
    CHECK_THROWS_AS(ovb::emit_mlm("has ⟨M1⟩ inside", {}, 0), ovb::DegenerateInput);
    CHECK_THROWS_AS(ovb::emit_mlm("bad \xff byte", {}, 0), ovb::DegenerateInput);
    CHECK_THROWS_AS(ovb::emit_mlm("fine text", {1.0, 3.0}, 0), ovb::ValidationError);
    CHECK_THROWS_AS(ovb::emit_mlm("fine text", {0.15, 0.5}, 0), ovb::ValidationError);
  }

  TEST_CASE("bidirectional pairs") {
    const auto [ab, ba] = ovb::emit_bt("node;", "nodes", DataType::kOvqNlPair, 1, 8);
    CHECK(ab.input == "node;");
    CHECK(ab.target == "nodes");
    CHECK(ba.input == "nodes");
    CHECK(ba.target == "node;");
    CHECK(ab.index == 8);
    CHECK(ba.index == 9);
    CHECK(ab.objective == ovb::Objective::kBt);
  }

  TEST_CASE("plans") {
    const auto plan = ovb::default_plan();
    CHECK_NOTHROW(ovb::validate_plan(plan));
    const auto counts = ovb::planned_counts(plan, 1000);
    CHECK(counts.at(DataType::kOvq) == 200);
    CHECK(counts.at(DataType::kNl) == 200);
    CHECK(counts.at(DataType::kTag) == 254);
    CHECK(counts.at(DataType::kTagDesc) == 73);
    CHECK(counts.at(DataType::kTagDescPair) == 72);
    CHECK(counts.at(DataType::kOvqNlPair) == 200);

    auto bad = plan;
    bad.proportions[DataType::kTag] = 0.5;
    CHECK_THROWS_AS(ovb::validate_plan(bad), ovb::ValidationError);

    const auto parsed = ovb::plan_from_json(
        {{"proportions", {{"ovq", 0.5}, {"nl", 0.5}, {"tag", 0}, {"tag_desc", 0},
                          {"tag_desc_pair", 0}, {"ovq_nl_pair", 0}}},
         {"total", 10}});
    CHECK(*parsed.total == 10);
    CHECK(parsed.proportions.at(DataType::kOvq) == 0.5);
    CHECK_THROWS_AS(ovb::plan_from_json({{"proportions", {{"bogus", 1.0}}}}),
                    ovb::ValidationError);
  }

  TEST_CASE("triples are normalized and invalid ones dropped") {
    const std::vector<ovb::RawTriple> raw = {
        {" amenity ", "=", "pub"}, {"name", "exists", std::nullopt},
        {"", "=", "x"},           {"shop", "exists", "oops"},
        {"shop", "<>", "x"}};
    const auto n = ovb::normalize_triples(raw);
    CHECK(n.tags.size() == 3);
    CHECK(n.dropped == 2);
    CHECK(n.tags[0] == Tag::make("amenity", TagRelation::kEquals, "pub"));
    // A stray value on an existence relation is ignored.
    CHECK(n.tags[2] == Tag::make("shop", TagRelation::kExists));
  }

  TEST_CASE("dedup by normalized text") {
    const std::vector<std::string> items = {"Café  bar", "Cafe\xCC\x81 bar", "other"};
    const auto d = ovb::dedup(items);
    CHECK(d.items.size() == 2);
    CHECK(d.duplicates == 1);

    const std::vector<std::string> qs = {"node[a=b];out;", "node [ a = b ] ; out ;",
                                         "node[a=", "make stat x=1;"};
    const auto dq = ovb::dedup_queries(qs);
    CHECK(dq.items.size() == 1);
    CHECK(dq.duplicates == 1);
    CHECK(dq.dropped == 2);
  }

  TEST_CASE("default plan proportions on a 1000-item build") {
    const auto src = ovb::clean_sources(t::synthetic_sources(400, 200, 300, 1));
    const auto corpus = build(src, 42);
    std::map<DataType, std::size_t> counts;
    std::map<std::string, std::size_t> directions;
    for (const auto& e : corpus.examples) {
      ++counts[e.data_type];
      if (e.objective == ovb::Objective::kBt) {
        const bool forward = e.data_type == DataType::kOvqNlPair
                                 ? e.input.find(';') != std::string::npos
                                 : e.input.rfind("[", 0) == 0;
        ++directions[std::string(ovb::data_type_name(e.data_type)) +
                     (forward ? ">" : "<")];
      }
    }
    const std::map<DataType, double> expected = {
        {DataType::kOvq, 200},     {DataType::kNl, 200},
        {DataType::kTag, 254},     {DataType::kTagDesc, 73},
        {DataType::kTagDescPair, 73}, {DataType::kOvqNlPair, 200}};
    for (const auto& [type, n] : expected) {
      CAPTURE(ovb::data_type_name(type));
      CHECK(std::abs(static_cast<double>(counts[type]) - n) <= 1.0);
    }
    CHECK(directions["tag_desc_pair>"] == directions["tag_desc_pair<"]);
    CHECK(directions["ovq_nl_pair>"] == directions["ovq_nl_pair<"]);
    CHECK(corpus.manifest["planned_total"] == 1000);
    CHECK(corpus.manifest["counts"]["tag/mlm"] == 254);
    for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
      CHECK(corpus.examples[i].index == i);
    }
  }

  TEST_CASE("builds are deterministic and policy independent") {
    const auto src = ovb::clean_sources(t::synthetic_sources(200, 100, 150, 2));
    const auto a = ovb::corpus_to_jsonl(build(src, 9, ovb::ExecPolicy::kParallel, 400));
    const auto b = ovb::corpus_to_jsonl(build(src, 9, ovb::ExecPolicy::kSerial, 400));
    CHECK(a == b);
    CHECK(a != ovb::corpus_to_jsonl(build(src, 10, ovb::ExecPolicy::kSerial, 400)));
  }

  TEST_CASE("every MLM example reconstructs to a source text") {
    const auto src = ovb::clean_sources(t::synthetic_sources(200, 100, 150, 3));
    std::set<std::string> texts;
    for (const auto& [q, n] : src.ovq_nl) {
      texts.insert(q);
      texts.insert(n);
    }
    for (const auto& [tg, d] : src.tag_desc) texts.insert(d);
    for (const Tag& tg : src.tags) texts.insert(ovb::render_tag(tg));
    for (const auto& e : build(src, 1, ovb::ExecPolicy::kParallel, 400).examples) {
      if (e.objective == ovb::Objective::kMlm) {
        CHECK(texts.count(ovb::reconstruct(e)) == 1);
      }
    }
  }

  TEST_CASE("leakage gate") {
    const auto src = ovb::clean_sources(t::synthetic_sources(200, 100, 150, 4));
    ovb::CorpusBuildOptions opts;
    opts.plan.total = 100;
    const std::vector<std::string> planted = {"  " + src.ovq_nl[17].second + " "};
    CHECK_THROWS_AS(ovb::build_corpus(src, planted, opts), ovb::LeakageError);
    // A reformatted copy of a source query is caught through its canonical print.
    const std::vector<std::string> query = {src.ovq_nl[3].first + "\n"};
    CHECK_THROWS_AS(ovb::build_corpus(src, query, opts), ovb::LeakageError);
    const std::vector<std::string> clean = {"a sentence nobody wrote"};
    CHECK_NOTHROW(ovb::build_corpus(src, clean, opts));
  }

  TEST_CASE("infeasible plans name the short type") {
    const auto src = ovb::clean_sources(t::synthetic_sources(20, 10, 10, 5));
    ovb::CorpusBuildOptions opts;
    opts.plan.total = 5000;
    try {
      ovb::build_corpus(src, {}, opts);
      FAIL("expected PlanInfeasible");
    } catch (const ovb::PlanInfeasible& e) {
      CHECK(std::string(e.what()).find("source for") != std::string::npos);
    }
    opts.plan.total.reset();
    const auto c = ovb::build_corpus(src, {}, opts);
    CHECK(c.manifest["planned_total"].get<std::size_t>() > 0);
  }
}
