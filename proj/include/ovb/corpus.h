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


// Pre-training corpus: six data types, span-corruption (MLM) examples for
// the monolingual types and both-direction translation (BT) pairs for the
// aligned types.

#ifndef OVB_CORPUS_H_
#define OVB_CORPUS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ovb/parallel.h"
#include "ovb/tag.h"

namespace ovb {

enum class DataType { kOvq, kNl, kTag, kTagDesc, kTagDescPair, kOvqNlPair };
enum class Objective { kMlm, kBt };

inline constexpr std::array<DataType, 6> kAllDataTypes = {
    DataType::kOvq,     DataType::kNl,          DataType::kTag,
    DataType::kTagDesc, DataType::kTagDescPair, DataType::kOvqNlPair};

std::string_view data_type_name(DataType type);
std::optional<DataType> data_type_from_name(std::string_view name);
std::string_view objective_name(Objective objective);
Objective objective_of(DataType type);

struct CorpusExample {
  DataType data_type = DataType::kOvq;
  Objective objective = Objective::kMlm;
  std::string input;
  std::string target;
  std::uint64_t seed = 0;   // global seed
  std::size_t index = 0;    // position in the emitted corpus
};

nlohmann::json example_to_json(const CorpusExample& example);

struct RawTriple {
  std::string key;
  std::string relation;
  std::optional<std::string> value;
};

struct NormalizedTags {
  std::vector<Tag> tags;
  std::size_t dropped = 0;
};

// Malformed rows (empty key, unknown relation, value presence mismatch) are
// dropped and counted.
NormalizedTags normalize_triples(std::span<const RawTriple> raw);

struct DedupResult {
  std::vector<std::string> items;
  std::size_t duplicates = 0;
  std::size_t dropped = 0;  // queries that failed syntax correction
};

// Order-preserving dedup after NFC and whitespace collapsing.
DedupResult dedup(std::span<const std::string> items);

// Each query is replaced by its canonical print. Queries that do not parse,
// or whose raw statements cover more than half of their bytes, are dropped.
DedupResult dedup_queries(std::span<const std::string> queries);

struct MlmParams {
  double mask_rate = 0.15;
  double mean_span = 3.0;
};

// "⟨M1⟩", "⟨M2⟩", ...
std::string sentinel(std::size_t i);

// Span corruption over code points. round(length * mask_rate) code points
// are masked in non-adjacent spans whose lengths are geometric with the
// given mean. Throws DegenerateInput when the text is shorter than one mean
// span, is not valid UTF-8, or already contains a sentinel prefix.
CorpusExample emit_mlm(std::string_view text, const MlmParams& params,
                       std::uint64_t seed, DataType type = DataType::kNl,
                       std::size_t index = 0);

// Splices the target spans back over the sentinels of the input.
std::string reconstruct(const CorpusExample& mlm_example);

// (a -> b, b -> a) with indices index and index + 1.
std::pair<CorpusExample, CorpusExample> emit_bt(std::string_view a,
                                                std::string_view b,
                                                DataType type,
                                                std::uint64_t seed = 0,
                                                std::size_t index = 0);

struct PartitionPlan {
  std::map<DataType, double> proportions;
  std::optional<std::size_t> total;  // largest feasible total when unset
};

// 20 / 20 / 25.4 / 7.3 / 7.3 / 20 percent by example count.
PartitionPlan default_plan();

// {"proportions": {"ovq": 0.2, ...}, "total": 1000}. Throws ValidationError
// unless the fractions sum to 1 within 1e-9.
PartitionPlan plan_from_json(const nlohmann::json& j);
void validate_plan(const PartitionPlan& plan);

// Example count per type for a given total. BT types get an even count
// (both directions of every pair), rounded down.
std::map<DataType, std::size_t> planned_counts(const PartitionPlan& plan,
                                               std::size_t total);

struct CorpusSources {
  std::vector<std::pair<std::string, std::string>> ovq_nl;    // (query, nl)
  std::vector<std::pair<std::string, std::string>> tag_desc;  // (tag, desc)
  std::vector<Tag> tags;
};

struct SourceCleaning {
  std::size_t dropped_queries = 0;   // pairs whose query failed correction
  std::size_t duplicate_pairs = 0;
  std::size_t duplicate_tag_desc = 0;
  std::size_t duplicate_tags = 0;
};

// Canonical query prints, normalized text and order-preserving dedup of
// every source.
CorpusSources clean_sources(const CorpusSources& raw,
                            SourceCleaning* stats = nullptr);

nlohmann::json cleaning_to_json(const SourceCleaning& stats);

struct CorpusBuildOptions {
  PartitionPlan plan = default_plan();
  MlmParams mlm;
  std::uint64_t seed = 0;
  ExecPolicy policy = ExecPolicy::kParallel;
};

struct Corpus {
  std::vector<CorpusExample> examples;  // emitted order
  nlohmann::json manifest;
};

// Throws LeakageError when any source string equals a holdout string after
// normalization, PlanInfeasible when a source cannot fill its share.
Corpus build_corpus(const CorpusSources& sources,
                    std::span<const std::string> holdout,
                    const CorpusBuildOptions& options);

std::string corpus_to_jsonl(const Corpus& corpus);

}  // namespace ovb

#endif  // OVB_CORPUS_H_
