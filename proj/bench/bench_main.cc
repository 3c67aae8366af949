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


// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "ovb/corpus.h"
#include "ovb/embedding.h"
#include "ovb/knowledge_base.h"
#include "ovb/metrics.h"
#include "ovb/parallel.h"
#include "ovb/retrieval.h"
#include "synthetic.h"

namespace {

namespace t = ovb::testing;

ovb::ExecPolicy policy_of(const benchmark::State& state) {
  return state.range(0) == 0 ? ovb::ExecPolicy::kSerial : ovb::ExecPolicy::kParallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

const std::vector<ovb::metrics::PairInput>& pairs() {
  static const auto value = [] {
    const auto a = t::overpass_corpus(2000, 5);
    const auto b = t::overpass_corpus(2000, 6);
    std::vector<ovb::metrics::PairInput> out;
    for (std::size_t i = 0; i < a.size(); ++i) {
      out.push_back({std::to_string(i), a[i], b[i]});
    }
    return out;
  }();
  return value;
}

void BM_ScorePairs(benchmark::State& state) {
  const auto& p = pairs();
  for (auto _ : state) {
    auto rows = state.range(0) == 0
                    ? ovb::metrics::score_pairs_serial(p, ovb::metrics::KvsMode::kItems)
                    : ovb::metrics::score_pairs_parallel(p, ovb::metrics::KvsMode::kItems);
    benchmark::DoNotOptimize(rows);
  }
  state.SetItemsProcessed(state.iterations() * p.size());
  label(state);
}
BENCHMARK(BM_ScorePairs)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SimilarityScan(benchmark::State& state) {
  static const ovb::HashedNgramProvider provider;
  static const auto kb =
      ovb::finalize(t::synthetic_entries(50000, 3), provider, "grid", 3);
  const auto query = provider.embed("cafe with outdoor seating");
  for (auto _ : state) {
    auto sims = state.range(0) == 0 ? ovb::similarity_scan_serial(kb, query)
                                    : ovb::similarity_scan_parallel(kb, query);
    benchmark::DoNotOptimize(sims);
  }
  state.SetItemsProcessed(state.iterations() * kb.size());
  label(state);
}
BENCHMARK(BM_SimilarityScan)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_EmbedAll(benchmark::State& state) {
  const ovb::HashedNgramProvider provider;
  const auto texts = t::synthetic_requests(5000, 9);
  for (auto _ : state) {
    auto v = ovb::embed_all(provider, texts, policy_of(state));
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * texts.size());
  label(state);
}
BENCHMARK(BM_EmbedAll)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BuildCorpus(benchmark::State& state) {
  const auto sources = ovb::clean_sources(t::synthetic_sources(4000, 2000, 3000, 4));
  ovb::CorpusBuildOptions options;
  options.plan.total = 1500;
  options.seed = 4;
  options.policy = policy_of(state);
  for (auto _ : state) {
    auto corpus = ovb::build_corpus(sources, {}, options);
    benchmark::DoNotOptimize(corpus);
  }
  state.SetItemsProcessed(state.iterations() * *options.plan.total);
  label(state);
}
BENCHMARK(BM_BuildCorpus)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
