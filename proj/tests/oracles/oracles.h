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


// Brute-force reference computations used only by the tests.

#ifndef OVB_TESTS_ORACLES_ORACLES_H_
#define OVB_TESTS_ORACLES_ORACLES_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ovb/canonical_tree.h"
#include "ovb/knowledge_base.h"
#include "synthetic.h"

namespace ovb::testing {

double chrf_oracle(std::string_view pred, std::string_view ref);

// Items straight from the filter list, no parser involved.
std::vector<std::string> kvs_items_oracle(const std::vector<RawFilter>& filters,
                                          bool pairs_only);
double kvs_oracle(const std::vector<RawFilter>& pred,
                  const std::vector<RawFilter>& ref, bool pairs_only = false);

// Minimum-cost Tai mapping by exhaustive search. Only for tiny trees.
std::size_t ted_oracle(const ql::CanonicalTree& a, const ql::CanonicalTree& b);
double trees_oracle(const ql::CanonicalTree& a, const ql::CanonicalTree& b);

ql::CanonicalTree random_tree(std::uint64_t seed, std::size_t max_size,
                              std::string_view alphabet);

// (id, similarity) for every entry, by double loops over the stored floats.
std::vector<std::pair<std::size_t, double>> cosine_rank_oracle(
    const KnowledgeBase& kb, const std::vector<float>& query);

}  // namespace ovb::testing

#endif  // OVB_TESTS_ORACLES_ORACLES_H_
