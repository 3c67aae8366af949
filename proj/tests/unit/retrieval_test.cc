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
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oracles.h"
#include "ovb/embedding.h"
#include "ovb/errors.h"
#include "ovb/knowledge_base.h"
#include "ovb/retrieval.h"
#include "stub_server.h"
#include "synthetic.h"

using nlohmann::json;
using ovb::Tag;
using ovb::TagRelation;
namespace t = ovb::testing;

namespace {

const ovb::KnowledgeBase& big_kb() {
  static const ovb::KnowledgeBase kb = ovb::finalize(
      t::synthetic_entries(1000, 3), ovb::HashedNgramProvider(), "grid", 3);
  return kb;
}

ovb::KnowledgeBase small_kb() {
  std::vector<ovb::KnowledgeEntry> e(3);
  e[0].query = "pubs in the old town";
  e[0].tags = {Tag::make("amenity", TagRelation::kEquals, "pub")};
  e[1].query = "bars in the old town";
  e[1].tags = {Tag::make("amenity", TagRelation::kEquals, "bar")};
  e[2].query = "mountain peaks";
  e[2].tags = {Tag::make("natural", TagRelation::kEquals, "peak")};
  return ovb::finalize(e, ovb::HashedNgramProvider(), "test", 0);
}

class ScriptedRefiner : public ovb::TagRefiner {
 public:
  explicit ScriptedRefiner(ovb::TagSet out, bool fail = false)
      : out_(std::move(out)), fail_(fail) {}
  std::string id() const override { return "scripted"; }
  ovb::TagSet refine(const ovb::RefineRequest&) const override {
    if (fail_) throw ovb::RefinerError("refiner down");
    return out_;
  }

 private:
  ovb::TagSet out_;
  bool fail_;
};

ovb::ValidTagSet all_valid(const ovb::KnowledgeBase& kb) {
  ovb::ValidTagSet v;
  for (const auto& e : kb.entries()) v.entries.insert(e.tags.begin(), e.tags.end());
  return v;
}

}  // namespace

TEST_SUITE("retrieval") {
  TEST_CASE("cosine scan matches the oracle") {
    const auto& kb = big_kb();
    const ovb::HashedNgramProvider p;
    for (const auto& q : t::synthetic_requests(20, 77)) {
      const auto v = p.embed(q);
      const auto serial = ovb::similarity_scan_serial(kb, v);
      const auto parallel = ovb::similarity_scan_parallel(kb, v);
      CHECK(serial == parallel);
      const auto oracle = t::cosine_rank_oracle(kb, v);
      const auto top = ovb::top_j(serial, 20);
      REQUIRE(top.size() == 20);
      for (std::size_t i = 0; i < 20; ++i) {
        CHECK(top[i].id == oracle[i].first);
        CHECK(top[i].similarity == doctest::Approx(oracle[i].second).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("top_j ordering breaks ties by id") {
    const std::vector<double> sims = {0.5, 0.9, 0.5, 0.9, 0.1};
    const auto top = ovb::top_j(sims, 4);
    REQUIRE(top.size() == 4);
    CHECK(top[0].id == 1);
    CHECK(top[1].id == 3);
    CHECK(top[2].id == 0);
    CHECK(top[3].id == 2);
    CHECK(ovb::top_j(sims, 50).size() == 5);
  }

  TEST_CASE("every entry retrieves itself first") {
    const auto kb = small_kb();
    const ovb::HashedNgramProvider p;
    for (std::size_t i = 0; i < kb.size(); ++i) {
      const auto r = ovb::retrieve(kb.entry(i).query, kb, p, 1);
      REQUIRE(r.neighbors.size() == 1);
      CHECK(r.neighbors[0].id == i);
      CHECK(r.t_ret == kb.entry(i).tags);
    }
  }

  TEST_CASE("retrieve validates its inputs") {
    const auto kb = small_kb();
    CHECK_THROWS_AS(ovb::retrieve("", kb, ovb::HashedNgramProvider(), 3),
                    ovb::ValidationError);
    CHECK_THROWS_AS(ovb::retrieve("pubs", kb, ovb::HashedNgramProvider(), 0),
                    ovb::ValidationError);
    CHECK_THROWS_AS(ovb::retrieve("pubs", kb, ovb::HashedNgramProvider(64), 3),
                    ovb::ValidationError);
  }

  TEST_CASE("refiner output is restricted to retrieved tags") {
    const ovb::TagSet t_ret = {Tag::make("amenity", TagRelation::kEquals, "pub"),
                               Tag::make("amenity", TagRelation::kEquals, "bar")};
    const ScriptedRefiner r(
        {Tag::make("amenity", TagRelation::kEquals, "pub"),
         Tag::make("amenity", TagRelation::kEquals, "nightclub")});
    const auto out = ovb::refine("pubs", t_ret, r);
    CHECK(out.tags.size() == 1);
    CHECK(out.dropped == 1);
    CHECK_FALSE(out.warnings.empty());

    const auto fallback = ovb::refine("pubs", t_ret, ScriptedRefiner({}, true));
    CHECK(fallback.fell_back);
    CHECK(fallback.tags == t_ret);
  }

  TEST_CASE("t_valid is always a subset of the valid set") {
    const auto& kb = big_kb();
    ovb::ValidTagSet valid;
    const auto grid = t::tag_grid(30, 10);
    for (std::size_t i = 0; i < grid.size(); i += 3) valid.entries.insert(grid[i]);
    for (const auto& q : t::synthetic_requests(25, 5)) {
      const auto r = ovb::tra(q, kb, ovb::HashedNgramProvider(), valid, 20,
                              ovb::PassThroughRefiner());
      for (const Tag& tag : r.t_valid) {
        CHECK(valid.contains(tag));
        CHECK(r.t_ref.count(tag));
      }
    }
  }

  TEST_CASE("augmented input format") {
    const auto kb = small_kb();
    const auto r = ovb::tra("pubs in the old town", kb, ovb::HashedNgramProvider(),
                            all_valid(kb), 1, ovb::PassThroughRefiner());
    CHECK(ovb::augmented_input(r) ==
          "pubs in the old town\n<TAGS>\n[\"amenity\"=\"pub\"]");
    ovb::RetrievalResult empty;
    empty.query = "nothing";
    CHECK(ovb::augmented_input(empty) == "nothing");
    const auto j = ovb::result_to_json(r, kb);
    CHECK(j["neighbors"][0]["query"] == "pubs in the old town");
    CHECK(j["t_valid"].size() == 1);
  }

  TEST_CASE("remote refiner reads tags from free text") {
    t::JsonStub stub([](const std::string& body) {
      CHECK(json::parse(body)["prompt"].get<std::string>().find("pubs") !=
            std::string::npos);
      return std::pair<int, std::string>{
          200, R"({"text":"Use [\"amenity\"=\"pub\"] only."})"};
    });
    const auto kb = small_kb();
    const auto r = ovb::tra("pubs in the old town", kb, ovb::HashedNgramProvider(),
                            all_valid(kb), 3, ovb::RemoteRefiner(stub.url(), {5, 0, 0}));
    CHECK(r.t_ret.size() == 3);
    CHECK(r.t_valid == ovb::TagSet{Tag::make("amenity", TagRelation::kEquals, "pub")});
    CHECK_FALSE(r.refiner_fell_back);
  }

  TEST_CASE("beekeeper request resolves to the craft key") {
    const std::string dir = OVB_FIXTURE_DIR;
    const auto valid = ovb::load_valid_tags(dir + "/beekeeper_valid.jsonl");
    const auto data = ovb::load_dataset(dir + "/beekeeper_dataset.jsonl");
    const ovb::HashedNgramProvider p;
    const auto kb =
        ovb::build_kb(data, valid, ovb::TemplateGenerator(), p, {5, 0});
    const auto r = ovb::tra("Beekeeper workplaces in the current view", kb, p,
                            valid, ovb::kDefaultTopJ, ovb::PassThroughRefiner());
    // The misleading observed entry is retrieved but filtered out.
    CHECK(r.t_ret.count(Tag::make("workplace", TagRelation::kEquals, "beekeeper")));
    CHECK(r.t_valid.count(Tag::make("craft", TagRelation::kEquals, "beekeeper")));
    for (const Tag& tag : r.t_valid) CHECK(tag.key() != "workplace");
    const std::string input = ovb::augmented_input(r);
    CHECK(input.substr(input.find("<TAGS>")).find("workplace") == std::string::npos);
  }
}
