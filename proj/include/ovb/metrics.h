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

// Text-to-OverpassQL scores. Every score is in [0, 1]; reports render them
// x100 with one decimal.
//
//   EM      exact match after trimming outer whitespace
//   chrF    character n-gram F-score, n = 1..6, beta = 2
//   KVS     |KV(pred) & KV(ref)| / max(|KV(pred)|, |KV(ref)|)
//   TreeS   1 - TED / max(size) over canonical trees
//   OQS     (chrF + KVS + TreeS) / 3
//   EX      element sets identical
//   EX_soft |pred & ref| / max(|pred|, |ref|)

#ifndef OVB_METRICS_H_
#define OVB_METRICS_H_

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ovb/ast.h"
#include "ovb/canonical_tree.h"
#include "ovb/element_ref.h"
#include "ovb/parallel.h"
#include "ovb/tag.h"

namespace ovb::metrics {

inline constexpr int kChrfMaxOrder = 6;
inline constexpr double kChrfBeta = 2.0;

double exact_match(std::string_view pred, std::string_view ref);

double chrf(std::string_view pred, std::string_view ref);

enum class KvsMode {
  kItems,      // pair, key and value items per filter
  kPairsOnly,  // only the pair item (key item for existence filters)
};

std::optional<KvsMode> kvs_mode_from_name(std::string_view name);
std::string_view kvs_mode_name(KvsMode mode);

using KvItemSet = std::set<std::string>;

KvItemSet kv_items(const TagSet& tags, KvsMode mode = KvsMode::kItems);

double kvs(const TagSet& pred, const TagSet& ref,
           KvsMode mode = KvsMode::kItems);
double kvs(const ql::QueryAst& pred, const ql::QueryAst& ref,
           KvsMode mode = KvsMode::kItems);

// Ordered tree edit distance with unit insert/delete/relabel costs
// (Zhang-Shasha).
std::size_t tree_edit_distance(const ql::CanonicalTree& a,
                               const ql::CanonicalTree& b);

double trees(const ql::CanonicalTree& pred, const ql::CanonicalTree& ref);

double oqs(double chrf, double kvs, double trees);

double ex(const ElementSet& pred, const ElementSet& ref);
double ex_soft(const ElementSet& pred, const ElementSet& ref);

struct PairInput {
  std::string id;
  std::string pred;
  std::string ref;
};

// Execution outcome of one pair. A non-empty flag marks a failed execution
// (timeout, syntax error, ...); such pairs score ex = ex_soft = 0.
struct ExecOutcome {
  ElementSet pred;
  ElementSet ref;
  std::string flag;
};

struct PairScores {
  std::string id;
  double em = 0;
  double chrf = 0;
  double kvs = 0;
  double trees = 0;
  double oqs = 0;
  std::optional<double> ex;
  std::optional<double> ex_soft;
  bool pred_parsed = true;
  bool ref_parsed = true;
  std::string exec_flag;
};

struct Aggregate {
  std::size_t count = 0;
  double em = 0;
  double chrf = 0;
  double kvs = 0;
  double trees = 0;
  double oqs = 0;
  std::size_t exec_count = 0;
  std::optional<double> ex;
  std::optional<double> ex_soft;
};

struct MetricReport {
  std::vector<PairScores> per_pair;  // sorted by id
  Aggregate aggregate;
};

// String and structure scores of one pair (no execution columns).
PairScores score_pair(const PairInput& pair, KvsMode mode);

// Data-parallel row scoring. Both return rows in input order and must agree
// exactly.
std::vector<PairScores> score_pairs_serial(std::span<const PairInput> pairs,
                                           KvsMode mode);
std::vector<PairScores> score_pairs_parallel(std::span<const PairInput> pairs,
                                             KvsMode mode);

struct EvalOptions {
  KvsMode kvs_mode = KvsMode::kItems;
  ExecPolicy policy = ExecPolicy::kParallel;
};

// Throws ReportError on duplicate ids or exec ids missing from pairs.
MetricReport evaluate_batch(std::span<const PairInput> pairs,
                            const std::map<std::string, ExecOutcome>& exec,
                            const EvalOptions& options = {});

// Score in [0, 1] rendered x100 rounded to one decimal.
double percent(double score);

// {"aggregate": {... x100 ...}, "aggregate_raw": {...}, "per_pair": [...]}
nlohmann::json report_to_json(const MetricReport& report);
// One row per pair plus a final AGGREGATE row, all x100 one decimal.
std::string report_to_csv(const MetricReport& report);

}  // namespace ovb::metrics

#endif  // OVB_METRICS_H_
