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


// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.h"
#include "json.hpp"
#include "oracles.h"
#include "ovb/canonical_tree.h"
#include "ovb/corpus.h"
#include "ovb/embedding.h"
#include "ovb/errors.h"
#include "ovb/io.h"
#include "ovb/knowledge_base.h"
#include "ovb/lexer.h"
#include "ovb/metrics.h"
#include "ovb/parser.h"
#include "ovb/random.h"
#include "ovb/retrieval.h"
#include "ovb/text.h"
#include "stub_server.h"
#include "synthetic.h"

namespace fs = std::filesystem;
namespace m = ovb::metrics;
namespace ql = ovb::ql;
namespace t = ovb::testing;
using nlohmann::json;
using ovb::Tag;
using ovb::TagRelation;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> problems;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (problems.size() < 5) problems.push_back(what);
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const std::string kFixtures = OVB_FIXTURE_DIR;

const char* kSquare =
    "[out:csv(::count)][timeout:240];(way[\"area\"=\"yes\"][\"highway\"="
    "\"unclassified\"][\"place\"=\"square\"](if:is_closed());relation[\"type\"="
    "\"multipolygon\"][\"highway\"=\"unclassified\"][\"place\"=\"square\"];);"
    "out count;";
const char* kSquareWrong =
    "[out:json][timeout:25];(way[\"highway\"=\"unclassified\"][\"surface\"="
    "\"unclassified\"];relation[\"type\"=\"multipolygon\"][\"highway\"="
    "\"unclassified\"][\"surface\"=\"unclassified\"];);out count;";

void metric_identity(Outcome& o) {
  const auto start = Clock::now();
  std::vector<m::PairInput> pairs;
  for (const auto& [id, q] : t::fixture_queries()) pairs.push_back({id, q, q});
  const auto report = m::evaluate_batch(pairs, {});
  const double elapsed = seconds_since(start);
  o.expect(pairs.size() == 200, "fixture has " + std::to_string(pairs.size()) +
                                    " queries");
  std::size_t perfect = 0;
  for (const auto& r : report.per_pair) {
    const bool ok = r.em == 1 && r.chrf == 1 && r.kvs == 1 && r.trees == 1 &&
                    r.oqs == 1;
    perfect += ok;
    o.expect(ok, "row " + r.id + " is not all ones");
  }
  o.expect(elapsed < 5.0, "took " + std::to_string(elapsed) + " s");
  o.detail << perfect << "/" << report.per_pair.size() << " rows all ones in "
           << elapsed << " s";
}

std::string filter_query(const std::vector<t::RawFilter>& filters) {
  std::string q = "node";
  for (const auto& f : filters) q += t::render_raw_filter(f);
  return q + ";out;";
}

void kvs_oracle(Outcome& o) {
  std::size_t agree = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto a = t::random_filters(ovb::derive_seed(1000 + s, 1), 5);
    const auto b = t::random_filters(ovb::derive_seed(1000 + s, 2), 5);
    const double got = m::kvs(ql::parse(filter_query(a)), ql::parse(filter_query(b)));
    const bool ok = got == t::kvs_oracle(a, b);
    agree += ok;
    o.expect(ok, filter_query(a) + " vs " + filter_query(b));
  }
  const double worked =
      m::kvs(ql::parse("node[amenity=pub];"), ql::parse("node[amenity=bar];"));
  o.expect(worked == 1.0 / 3.0, "worked example gave " + std::to_string(worked));
  const std::vector<t::RawFilter> gold = {{"area", "=", "yes"},
                                          {"highway", "=", "unclassified"},
                                          {"place", "=", "square"},
                                          {"type", "=", "multipolygon"}};
  const std::vector<t::RawFilter> pred = {{"highway", "=", "unclassified"},
                                          {"surface", "=", "unclassified"},
                                          {"type", "=", "multipolygon"}};
  const double hand = t::kvs_oracle(pred, gold);
  const double square = m::kvs(ql::parse(kSquareWrong), ql::parse(kSquare));
  o.expect(square == hand, "square pair gave " + std::to_string(square));
  o.detail << agree << "/50 random pairs exact; pub/bar " << worked
           << "; square pair " << square << " (hand " << hand << ")";
}

void trees_oracle(Outcome& o) {
  std::size_t agree = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto a = t::random_tree(ovb::derive_seed(2000 + s, 1), 6, "abc");
    const auto b = t::random_tree(ovb::derive_seed(2000 + s, 2), 6, "abc");
    const bool ok = m::trees(a, b) == t::trees_oracle(a, b);
    agree += ok;
    o.expect(ok, ql::tree_to_string(a) + " vs " + ql::tree_to_string(b));
  }
  const auto q = ql::canonical_tree(ql::parse(kSquare));
  o.expect(m::trees(q, q) == 1.0, "identical trees");
  o.expect(m::trees({"a", {}}, {"b", {}}) == 0.0, "single-node relabel");
  o.detail << agree << "/100 random trees exact; identical 1.0; relabel "
           << m::trees({"a", {}}, {"b", {}});
}

void oqs_decomposition(Outcome& o) {
  const auto fixtures = t::fixture_queries();
  std::vector<m::PairInput> pairs;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const auto& other = fixtures[(i * 37 + 11) % fixtures.size()].second;
    pairs.push_back({fixtures[i].first, other, fixtures[i].second});
  }
  const auto gen_a = t::overpass_corpus(300, 31);
  const auto gen_b = t::overpass_corpus(300, 32);
  for (std::size_t i = 0; i < gen_a.size(); ++i) {
    pairs.push_back({"g" + std::to_string(i), gen_a[i], gen_b[i]});
  }
  pairs.push_back({"broken", "node[amenity=", "node[amenity=pub];out;"});
  const auto report = m::evaluate_batch(pairs, {});
  double worst = 0;
  for (const auto& r : report.per_pair) {
    const double gap = std::abs(r.oqs - (r.chrf + r.kvs + r.trees) / 3.0);
    worst = std::max(worst, gap);
    o.expect(gap <= 1e-12, "row " + r.id);
  }
  o.detail << report.per_pair.size() << " rows, max deviation " << worst;
}

bool has_raw(const std::vector<ql::Statement>& statements) {
  for (const auto& s : statements) {
    if (s.kind == ql::StatementKind::kRaw) return true;
    if (has_raw(s.children) || has_raw(s.else_children)) return true;
  }
  return false;
}

void parser_round_trip(Outcome& o) {
  const auto corpus = t::overpass_corpus(500, 20260501);
  std::size_t lossless = 0, idempotent = 0, failed = 0, raw = 0;
  for (const auto& q : corpus) {
    try {
      lossless += ql::detokenize(ql::tokenize(q), q) == q;
      const auto ast = ql::parse(q);
      raw += has_raw(ast.statements);
      const std::string once = ql::print(ast);
      idempotent += ql::print(ql::parse(once)) == once;
    } catch (const std::exception& e) {
      ++failed;
      o.expect(false, std::string(e.what()) + " in " + q);
    }
  }
  o.expect(lossless == corpus.size(), "lossless lexing");
  o.expect(idempotent == corpus.size(), "idempotent printing");
  o.detail << "lossless " << lossless << "/500, idempotent " << idempotent
           << "/500, hard failures " << failed << ", raw fallback used in "
           << raw;
}

void kb_coverage(Outcome& o) {
  const auto grid = t::tag_grid(30, 10);
  ovb::ValidTagSet valid;
  valid.entries.insert(grid.begin(), grid.end());
  valid.source = "grid-300";
  const auto data = t::synthetic_dataset(grid, 200, 17);
  const ovb::HashedNgramProvider provider;
  const ovb::TemplateGenerator generator;
  ovb::KbBuildReport report;
  const auto kb = ovb::build_kb(data, valid, generator, provider, {5, 17}, &report);
  std::set<Tag> covered;
  for (const auto& e : kb.entries()) {
    for (const Tag& tag : e.tags) {
      if (valid.contains(tag)) covered.insert(tag);
    }
  }
  o.expect(valid.entries.size() == 300, "valid set size");
  o.expect(covered.size() == 300, "covered " + std::to_string(covered.size()));
  o.expect(report.generator_skips.empty(), "generator skipped tags");
  const auto again = ovb::build_kb(data, valid, generator, provider, {5, 17});
  const std::string a = ovb::serialize_kb(kb);
  const std::string b = ovb::serialize_kb(again);
  o.expect(a == b, "rebuild differs");
  o.detail << "covered " << covered.size() << "/300 (" << report.observed
           << " observed, " << report.generated << " generated, "
           << report.generator_skips.size() << " skips); rebuild sha256 "
           << ovb::text::sha256_hex(a).substr(0, 12)
           << (a == b ? " identical" : " differs");
}

void kb_retrieval(Outcome& o) {
  const ovb::HashedNgramProvider provider;
  const auto kb = ovb::finalize(t::synthetic_entries(1000, 23), provider, "grid", 23);
  std::size_t matched = 0;
  for (const auto& q : t::synthetic_requests(100, 901)) {
    const auto v = provider.embed(q);
    const auto got = ovb::retrieve(q, kb, provider, 20);
    const auto oracle = t::cosine_rank_oracle(kb, v);
    bool same = got.neighbors.size() == 20;
    for (std::size_t i = 0; same && i < 20; ++i) {
      same = got.neighbors[i].id == oracle[i].first;
    }
    matched += same;
    o.expect(same, "ranking differs for '" + q + "'");
  }
  std::size_t self = 0;
  for (std::size_t i = 0; i < kb.size(); ++i) {
    const auto r = ovb::retrieve(kb.entry(i).query, kb, provider, 1);
    const bool ok = r.neighbors.front().id == i;
    self += ok;
    o.expect(ok, "entry " + std::to_string(i) + " not first for itself");
  }
  ovb::ValidTagSet valid;
  const auto grid = t::tag_grid(30, 10);
  for (std::size_t i = 0; i < grid.size(); i += 2) valid.entries.insert(grid[i]);
  std::size_t subset = 0;
  for (const auto& q : t::synthetic_requests(100, 902)) {
    const auto r =
        ovb::tra(q, kb, provider, valid, 20, ovb::PassThroughRefiner());
    bool ok = true;
    for (const Tag& tag : r.t_valid) ok = ok && valid.contains(tag);
    subset += ok;
    o.expect(ok, "t_valid escapes the valid set");
  }

  const auto bee_valid = ovb::load_valid_tags(kFixtures + "/beekeeper_valid.jsonl");
  const auto bee_kb = ovb::build_kb(
      ovb::load_dataset(kFixtures + "/beekeeper_dataset.jsonl"), bee_valid,
      ovb::TemplateGenerator(), provider, {5, 0});
  const auto bee = ovb::tra("Beekeeper workplaces in the current view", bee_kb,
                            provider, bee_valid, ovb::kDefaultTopJ,
                            ovb::PassThroughRefiner());
  const bool craft =
      bee.t_valid.count(Tag::make("craft", TagRelation::kEquals, "beekeeper")) > 0;
  bool workplace = false;
  for (const Tag& tag : bee.t_valid) workplace = workplace || tag.key() == "workplace";
  o.expect(craft, "beekeeper request lacks craft=beekeeper");
  o.expect(!workplace, "beekeeper request kept a workplace key");
  o.detail << "top-20 equal to oracle " << matched << "/100; self rank 1 "
           << self << "/1000; t_valid subset " << subset
           << "/100; beekeeper -> craft=beekeeper " << (craft ? "yes" : "no")
           << ", workplace key " << (workplace ? "present" : "absent");
}

void corpus_proportions(Outcome& o) {
  const auto sources = ovb::clean_sources(t::synthetic_sources(400, 200, 300, 41));
  ovb::CorpusBuildOptions options;
  options.plan.total = 1000;
  options.seed = 41;
  const auto corpus = ovb::build_corpus(sources, {}, options);
  std::map<ovb::DataType, double> counts;
  std::map<ovb::DataType, std::pair<std::size_t, std::size_t>> directions;
  for (const auto& e : corpus.examples) {
    counts[e.data_type] += 1;
    if (e.objective == ovb::Objective::kBt) {
      const bool forward = e.data_type == ovb::DataType::kOvqNlPair
                               ? e.input.find(';') != std::string::npos
                               : e.input.rfind("[", 0) == 0;
      auto& d = directions[e.data_type];
      (forward ? d.first : d.second) += 1;
    }
  }
  const auto plan = ovb::default_plan();
  std::ostringstream mix;
  for (const auto& [type, frac] : plan.proportions) {
    const double want = frac * 1000;
    o.expect(std::abs(counts[type] - want) <= 1.0,
             std::string(ovb::data_type_name(type)) + " count " +
                 std::to_string(counts[type]));
    mix << ovb::data_type_name(type) << "=" << counts[type] << " ";
  }
  bool balanced = true;
  for (const auto& [type, d] : directions) balanced = balanced && d.first == d.second;
  o.expect(balanced && directions.size() == 2, "BT directions unbalanced");

  std::size_t reconstructed = 0, emitted = 0;
  std::vector<std::string> texts;
  for (const auto& [q, n] : sources.ovq_nl) {
    texts.push_back(q);
    texts.push_back(n);
  }
  for (const auto& [tg, d] : sources.tag_desc) texts.push_back(d);
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const std::string& text = texts[s % texts.size()];
    const auto ex = ovb::emit_mlm(text, {}, 7, ovb::DataType::kNl, s);
    ++emitted;
    reconstructed += ovb::reconstruct(ex) == text;
  }
  o.expect(reconstructed == 10000, "MLM reconstruction");

  bool caught = false;
  const std::vector<std::string> planted = {sources.ovq_nl[123].second};
  try {
    ovb::build_corpus(sources, planted, options);
  } catch (const ovb::LeakageError&) {
    caught = true;
  }
  o.expect(caught, "planted holdout string not caught");
  o.detail << mix.str() << "of " << corpus.examples.size()
           << "; MLM reconstruct " << reconstructed << "/" << emitted
           << "; BT directions " << (balanced ? "equal" : "unequal")
           << "; planted leak " << (caught ? "caught" : "missed");
}

struct ExecFixture {
  std::string id, pred, ref;
  double ex, ex_soft;
};

void exec_offline(Outcome& o) {
  using t::StubReply;
  const std::string bbox = "47.36,8.52,47.39,8.56";
  const auto at = [&](std::string q) {
    for (std::size_t p; (p = q.find("{{bbox}}")) != std::string::npos;) {
      q.replace(p, 8, bbox);
    }
    return q;
  };
  const std::string A = "node[\"amenity\"=\"cafe\"]({{bbox}});out;";
  const std::string A2 = "nwr[\"amenity\"=\"cafe\"]({{bbox}});out;";
  const std::string B = "node[\"amenity\"=\"cafe\"][\"wheelchair\"=\"yes\"]({{bbox}});out;";
  const std::string C = "way[\"highway\"=\"primary\"]({{bbox}});out;";
  const std::string D = "way[\"highway\"=\"secondary\"]({{bbox}});out;";
  const std::string E = "node[\"shop\"=\"bakery\"]({{bbox}});out;";
  const std::string F = "node[\"shop\"=\"pastry\"]({{bbox}});out;";
  const std::string G = "relation[\"route\"=\"bus\"(bbox);out;";
  const std::string H = "node[\"tourism\"=\"museum\"]({{bbox}});out;";
  const std::string I = "[out:xml];node[\"historic\"=\"castle\"]({{bbox}});out;";
  const std::string J = "[out:csv(::id,::type)];node[\"amenity\"=\"bench\"]({{bbox}});out;";
  const std::string K = "node[\"amenity\"=\"bench\"][\"backrest\"=\"yes\"]({{bbox}});out;";
  const std::string Lp = "[out:json];way[\"highway\"=\"service\"]({{bbox}});out count;";
  const std::string Lr = "[out:json];way[\"highway\"=\"unclassified\"]({{bbox}});out count;";
  const std::string M = "way[\"highway\"=\"primary\"][\"oneway\"=\"yes\"]({{bbox}});out;";

  t::StubServer stub;
  stub.on(at(A), {{200, t::overpass_json({"node/1", "node/2", "node/3"})}});
  stub.on(at(A2), {{200, t::overpass_json({"node/3", "node/2", "node/1"})}});
  stub.on(at(B), {{200, t::overpass_json({"node/1", "node/2"})}});
  stub.on(at(C), {{200, t::overpass_json({"way/10", "way/11", "way/12", "way/13"})}});
  stub.on(at(D), {{200, t::overpass_json({"way/20"})}});
  stub.on(at(E), {{200, t::overpass_json({})}});
  stub.on(at(F), {{200, t::overpass_json({})}});
  stub.on(at(G), {{400, "<p><strong>Error</strong>: line 1: parse error</p>", "text/html"}});
  stub.on(at(H), {{200, R"({"elements":[],"remark":"runtime error: Query timed out in \"query\" at line 1 after 180 seconds."})"}});
  stub.on(at(I), {{200,
                   "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\">\n"
                   "  <node id=\"5\" lat=\"47.37\" lon=\"8.53\"/>\n"
                   "  <node id=\"6\" lat=\"47.38\" lon=\"8.54\"/>\n</osm>\n",
                   "application/osm3s+xml"}});
  stub.on(at(J), {{200, "@id\t@type\n7\tnode\n8\tnode\n9\tnode\n10\tnode\n", "text/csv"}});
  stub.on(at(K), {{200, t::overpass_json({"node/7", "node/8"})}});
  stub.on(at(Lp), {{200, R"({"elements":[{"type":"count","id":0,"tags":{"nodes":"0","ways":"3","relations":"0","total":"3"}}]})"}});
  stub.on(at(Lr), {{200, R"({"elements":[{"type":"count","id":0,"tags":{"nodes":"0","ways":"15","relations":"0","total":"15"}}]})"}});
  stub.on(at(M), {{200, t::overpass_json({"way/10", "way/11", "way/12"})}});

  const std::vector<ExecFixture> fixtures = {
      {"p01", A2, A, 1, 1},        {"p02", B, A, 0, 2.0 / 3.0},
      {"p03", D, C, 0, 0},         {"p04", F, E, 1, 1},
      {"p05", G, C, 0, 0},         {"p06", H, A, 0, 0},
      {"p07", I, I, 1, 1},         {"p08", K, J, 0, 0.5},
      {"p09", Lp, Lr, 0, 0},       {"p10", M, C, 0, 0.75}};

  const fs::path dir =
      fs::temp_directory_path() / ("ovb-accept-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string pred, ref;
  for (const auto& f : fixtures) {
    pred += json{{"id", f.id}, {"text", f.pred}}.dump() + "\n";
    ref += json{{"id", f.id}, {"text", f.ref}}.dump() + "\n";
  }
  ovb::io::write_file_atomic(dir / "pred.jsonl", pred);
  ovb::io::write_file_atomic(dir / "ref.jsonl", ref);
  ::unsetenv("OVERPASS_URL");
  const std::vector<std::string> args = {
      "exec-eval", "--pred", (dir / "pred.jsonl").string(), "--ref",
      (dir / "ref.jsonl").string(), "--endpoint", stub.url(), "--bbox", bbox,
      "--cache", (dir / "cache").string(), "--rate", "1/s", "--log-level", "error"};
  std::ostringstream out, err;
  const int code = ovb::cli::run(args, out, err);
  o.expect(code == 0, "exec-eval exited " + std::to_string(code) + ": " + err.str());
  if (code != 0) return;
  const json report = json::parse(out.str());

  double ex_sum = 0, soft_sum = 0;
  std::size_t exact_rows = 0;
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    const json& row = report["per_pair"][i];
    const auto& f = fixtures[i];
    ex_sum += f.ex;
    soft_sum += f.ex_soft;
    const bool ok = row["id"] == f.id && row["ex"].get<double>() == f.ex &&
                    row["ex_soft"].get<double>() == f.ex_soft;
    exact_rows += ok;
    o.expect(ok, "row " + f.id + " " + row.dump());
  }
  const double want_ex = ex_sum / fixtures.size();
  const double want_soft = soft_sum / fixtures.size();
  o.expect(report["aggregate_raw"]["ex"].get<double>() == want_ex, "aggregate ex");
  o.expect(report["aggregate_raw"]["ex_soft"].get<double>() == want_soft,
           "aggregate ex_soft");

  const auto log = stub.log();
  double min_gap = 1e9;
  for (std::size_t i = 1; i < log.size(); ++i) {
    min_gap = std::min(min_gap,
                       std::chrono::duration<double>(log[i].at - log[i - 1].at).count());
  }
  o.expect(log.size() == 15, "stub saw " + std::to_string(log.size()) + " requests");
  o.expect(min_gap >= 1.0, "gap of " + std::to_string(min_gap) + " s");

  // Warm cache: everything but the timed-out query is served locally.
  std::ostringstream out2, err2;
  ovb::cli::run(args, out2, err2);
  const json again = json::parse(out2.str());
  o.expect(again["per_pair"] == report["per_pair"], "warm rerun differs");
  o.expect(again["network_requests"] == 1, "warm rerun requests " +
                                               again["network_requests"].dump());
  fs::remove_all(dir);
  o.detail << exact_rows << "/10 rows exact; EX " << report["aggregate"]["ex"]
           << " EX_soft " << report["aggregate"]["ex_soft"] << " (hand "
           << want_ex << ", " << want_soft << "); " << log.size()
           << " stub requests, min gap " << min_gap << " s; warm rerun "
           << again["network_requests"] << " request(s)";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"metric identity", metric_identity},
      {"kvs oracle equivalence", kvs_oracle},
      {"tree similarity oracle equivalence", trees_oracle},
      {"oqs decomposition", oqs_decomposition},
      {"parser round-trip", parser_round_trip},
      {"kb coverage", kb_coverage},
      {"retrieval fidelity", kb_retrieval},
      {"corpus proportions", corpus_proportions},
      {"execution metrics offline", exec_offline},
  };
  const auto start = Clock::now();
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      fn(o);
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": "
              << o.detail.str() << " [" << seconds_since(t0) << " s]\n";
    for (const auto& p : o.problems) std::cout << "      " << p << "\n";
  }
  std::cout << (failures == 0 ? "all criteria passed" : "criteria failed: " +
                                                            std::to_string(failures))
            << " in " << seconds_since(start) << " s\n";
  return failures;
}
