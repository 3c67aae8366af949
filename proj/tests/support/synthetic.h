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


// Deterministic synthetic inputs shared by the test binaries.

#ifndef OVB_TESTS_SUPPORT_SYNTHETIC_H_
#define OVB_TESTS_SUPPORT_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ovb/corpus.h"
#include "ovb/knowledge_base.h"
#include "ovb/tag.h"

namespace ovb::testing {

// (id, query) rows of fixtures/queries.jsonl.
std::vector<std::pair<std::string, std::string>> fixture_queries();

// Queries written the way Overpass Turbo users write them: settings
// blocks, {{bbox}}, areas, unions, recursion, regex and negated filters,
// comments, and constructs the grammar keeps as raw statements.
std::vector<std::string> overpass_corpus(std::size_t n, std::uint64_t seed);

// A filter as the generator wrote it, before any parsing.
struct RawFilter {
  std::string key;
  std::string op;  // "=", "!=", "~", "!~", "" (exists), "!" (not exists)
  std::string value;
};

std::string render_raw_filter(const RawFilter& f);

// Up to max_filters filters over a small vocabulary so that pairs overlap.
std::vector<RawFilter> random_filters(std::uint64_t seed,
                                      std::size_t max_filters);

// key x value grid; 30 keys x 10 values = 300 tags by default.
std::vector<Tag> tag_grid(std::size_t keys, std::size_t values_per_key);

// Question/query pairs over tags of the grid.
std::vector<DatasetPair> synthetic_dataset(const std::vector<Tag>& tags,
                                           std::size_t n, std::uint64_t seed);

// Distinct short request texts.
std::vector<std::string> synthetic_requests(std::size_t n, std::uint64_t seed);

// Unique request texts, each tagged with one or two grid tags.
std::vector<KnowledgeEntry> synthetic_entries(std::size_t n, std::uint64_t seed);

CorpusSources synthetic_sources(std::size_t pairs, std::size_t tag_desc,
                                std::size_t tags, std::uint64_t seed);

}  // namespace ovb::testing

#endif  // OVB_TESTS_SUPPORT_SYNTHETIC_H_
