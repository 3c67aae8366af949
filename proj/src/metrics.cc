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

#include "ovb/metrics.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "ovb/errors.h"
#include "ovb/parser.h"
#include "ovb/text.h"

namespace ovb::metrics {
namespace {

std::u32string strip_whitespace(std::string_view s) {
  std::u32string out;
  for (char32_t cp : text::decode_utf8(s)) {
    if (cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
        cp == U'\f' || cp == U'\v') {
      continue;
    }
    out.push_back(cp);
  }
  return out;
}

std::unordered_map<std::u32string, int> ngram_counts(const std::u32string& s,
                                                     std::size_t n) {
  std::unordered_map<std::u32string, int> counts;
  if (s.size() < n) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[s.substr(i, n)];
  return counts;
}

// Postorder flattening for Zhang-Shasha, 1-based.
struct FlatTree {
  std::vector<const std::string*> labels{nullptr};
  std::vector<std::size_t> leftmost{0};
  std::vector<std::size_t> keyroots;

  explicit FlatTree(const ql::CanonicalTree& root) {
    visit(root);
    std::vector<std::size_t> last_with_leftmost(labels.size(), 0);
    for (std::size_t i = 1; i < labels.size(); ++i) {
      last_with_leftmost[leftmost[i]] = i;
    }
    for (std::size_t i = 1; i < labels.size(); ++i) {
      if (last_with_leftmost[leftmost[i]] == i) keyroots.push_back(i);
    }
  }

  std::size_t size() const { return labels.size() - 1; }

 private:
  std::size_t visit(const ql::CanonicalTree& node) {
    std::size_t first_leaf = 0;
    for (const ql::CanonicalTree& child : node.children) {
      const std::size_t child_index = visit(child);
      if (first_leaf == 0) first_leaf = leftmost[child_index];
    }
    labels.push_back(&node.label);
    const std::size_t index = labels.size() - 1;
    leftmost.push_back(first_leaf == 0 ? index : first_leaf);
    return index;
  }
};

void add_tag_items(const Tag& tag, KvsMode mode, KvItemSet& items) {
  const std::string& key = tag.key();
  switch (tag.relation()) {
    case TagRelation::kExists:
      items.insert(key);
      return;
    case TagRelation::kNotExists:
      items.insert("!" + key);
      return;
    default:
      break;
  }
  const std::string& value = *tag.value();
  std::string op;
  switch (tag.relation()) {
    case TagRelation::kEquals: op = "="; break;
    case TagRelation::kNotEquals: op = "!="; break;
    case TagRelation::kNotRegexValue: op = "!~"; break;
    default: op = "~"; break;
  }
  items.insert(key + op + value);
  if (mode == KvsMode::kItems) {
    items.insert(key);
    items.insert(value);
  }
}

struct ParsedSide {
  TagSet tags;
  ql::CanonicalTree tree;
  bool parsed = true;
};

ParsedSide analyze(std::string_view query) {
  ParsedSide side;
  try {
    const ql::QueryAst ast = ql::parse(query);
    side.tags = ql::extract_tags(ast);
    side.tree = ql::canonical_tree(ast);
  } catch (const ValidationError&) {
    side.parsed = false;
    side.tags = scan_tags(query);
    side.tree = ql::unparsed_tree();
  }
  return side;
}

double mean(double sum, std::size_t n) { return n == 0 ? 0.0 : sum / n; }

std::string format_percent(double score) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << percent(score);
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

nlohmann::json aggregate_json(const Aggregate& a, bool as_percent) {
  const auto v = [&](double x) { return as_percent ? percent(x) : x; };
  nlohmann::json j{{"count", a.count},   {"em", v(a.em)},
                   {"chrf", v(a.chrf)},  {"kvs", v(a.kvs)},
                   {"trees", v(a.trees)}, {"oqs", v(a.oqs)},
                   {"exec_count", a.exec_count}};
  if (a.ex) j["ex"] = v(*a.ex);
  if (a.ex_soft) j["ex_soft"] = v(*a.ex_soft);
  return j;
}

}  // namespace

double exact_match(std::string_view pred, std::string_view ref) {
  return text::trim(pred) == text::trim(ref) ? 1.0 : 0.0;
}

double chrf(std::string_view pred, std::string_view ref) {
  const std::u32string hyp = strip_whitespace(pred);
  const std::u32string gold = strip_whitespace(ref);
  const double beta2 = kChrfBeta * kChrfBeta;
  double total = 0;
  int orders = 0;
  for (int n = 1; n <= kChrfMaxOrder; ++n) {
    const auto hyp_counts = ngram_counts(hyp, n);
    const auto ref_counts = ngram_counts(gold, n);
    const std::size_t hyp_total = hyp.size() >= static_cast<std::size_t>(n)
                                      ? hyp.size() - n + 1
                                      : 0;
    const std::size_t ref_total = gold.size() >= static_cast<std::size_t>(n)
                                      ? gold.size() - n + 1
                                      : 0;
    if (hyp_total == 0 && ref_total == 0) continue;
    ++orders;
    if (hyp_total == 0 || ref_total == 0) continue;
    std::size_t matches = 0;
    for (const auto& [gram, count] : hyp_counts) {
      const auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matches += std::min(count, it->second);
    }
    const double precision = static_cast<double>(matches) / hyp_total;
    const double recall = static_cast<double>(matches) / ref_total;
    const double denom = beta2 * precision + recall;
    if (denom > 0) total += (1 + beta2) * precision * recall / denom;
  }
  if (orders == 0) return 1.0;
  return total / orders;
}

std::optional<KvsMode> kvs_mode_from_name(std::string_view name) {
  if (name == "items") return KvsMode::kItems;
  if (name == "pairs-only") return KvsMode::kPairsOnly;
  return std::nullopt;
}

std::string_view kvs_mode_name(KvsMode mode) {
  return mode == KvsMode::kItems ? "items" : "pairs-only";
}

KvItemSet kv_items(const TagSet& tags, KvsMode mode) {
  KvItemSet items;
  for (const Tag& tag : tags) add_tag_items(tag, mode, items);
  return items;
}

double kvs(const TagSet& pred, const TagSet& ref, KvsMode mode) {
  const KvItemSet a = kv_items(pred, mode);
  const KvItemSet b = kv_items(ref, mode);
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::size_t common = 0;
  for (const std::string& item : a) common += b.count(item);
  return static_cast<double>(common) / std::max(a.size(), b.size());
}

double kvs(const ql::QueryAst& pred, const ql::QueryAst& ref, KvsMode mode) {
  return kvs(ql::extract_tags(pred), ql::extract_tags(ref), mode);
}

std::size_t tree_edit_distance(const ql::CanonicalTree& a,
                               const ql::CanonicalTree& b) {
  const FlatTree t1(a);
  const FlatTree t2(b);
  const std::size_t n1 = t1.size();
  const std::size_t n2 = t2.size();
  std::vector<std::vector<std::size_t>> tree_dist(
      n1 + 1, std::vector<std::size_t>(n2 + 1, 0));
  std::vector<std::vector<std::size_t>> forest;
  for (std::size_t k1 : t1.keyroots) {
    for (std::size_t k2 : t2.keyroots) {
      const std::size_t i0 = t1.leftmost[k1];
      const std::size_t j0 = t2.leftmost[k2];
      const std::size_t rows = k1 - i0 + 2;
      const std::size_t cols = k2 - j0 + 2;
      forest.assign(rows, std::vector<std::size_t>(cols, 0));
      for (std::size_t di = 1; di < rows; ++di) forest[di][0] = di;
      for (std::size_t dj = 1; dj < cols; ++dj) forest[0][dj] = dj;
      for (std::size_t i = i0; i <= k1; ++i) {
        const std::size_t di = i - i0 + 1;
        for (std::size_t j = j0; j <= k2; ++j) {
          const std::size_t dj = j - j0 + 1;
          const std::size_t del = forest[di - 1][dj] + 1;
          const std::size_t ins = forest[di][dj - 1] + 1;
          if (t1.leftmost[i] == i0 && t2.leftmost[j] == j0) {
            const std::size_t relabel =
                forest[di - 1][dj - 1] + (*t1.labels[i] == *t2.labels[j] ? 0 : 1);
            forest[di][dj] = std::min({del, ins, relabel});
            tree_dist[i][j] = forest[di][dj];
          } else {
            const std::size_t p = t1.leftmost[i] - i0;
            const std::size_t q = t2.leftmost[j] - j0;
            forest[di][dj] =
                std::min({del, ins, forest[p][q] + tree_dist[i][j]});
          }
        }
      }
    }
  }
  return tree_dist[n1][n2];
}

double trees(const ql::CanonicalTree& pred, const ql::CanonicalTree& ref) {
  const double ted = static_cast<double>(tree_edit_distance(pred, ref));
  const double norm = static_cast<double>(std::max(pred.size(), ref.size()));
  return std::clamp(1.0 - ted / norm, 0.0, 1.0);
}

double oqs(double chrf_score, double kvs_score, double trees_score) {
  return (chrf_score + kvs_score + trees_score) / 3.0;
}

double ex(const ElementSet& pred, const ElementSet& ref) {
  return pred == ref ? 1.0 : 0.0;
}

double ex_soft(const ElementSet& pred, const ElementSet& ref) {
  if (pred.empty() && ref.empty()) return 1.0;
  if (pred.empty() || ref.empty()) return 0.0;
  std::size_t common = 0;
  for (const ElementRef& e : pred) common += ref.count(e);
  return static_cast<double>(common) / std::max(pred.size(), ref.size());
}

PairScores score_pair(const PairInput& pair, KvsMode mode) {
  PairScores row;
  row.id = pair.id;
  const ParsedSide pred = analyze(pair.pred);
  const ParsedSide ref = analyze(pair.ref);
  row.pred_parsed = pred.parsed;
  row.ref_parsed = ref.parsed;
  row.em = pred.parsed ? exact_match(pair.pred, pair.ref) : 0.0;
  row.chrf = chrf(pair.pred, pair.ref);
  row.kvs = kvs(pred.tags, ref.tags, mode);
  row.trees = trees(pred.tree, ref.tree);
  row.oqs = oqs(row.chrf, row.kvs, row.trees);
  return row;
}

std::vector<PairScores> score_pairs_serial(std::span<const PairInput> pairs,
                                           KvsMode mode) {
  std::vector<PairScores> rows(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    rows[i] = score_pair(pairs[i], mode);
  }
  return rows;
}

std::vector<PairScores> score_pairs_parallel(std::span<const PairInput> pairs,
                                             KvsMode mode) {
  std::vector<PairScores> rows(pairs.size());
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    rows[i] = score_pair(pairs[i], mode);
  }
  return rows;
}

MetricReport evaluate_batch(std::span<const PairInput> pairs,
                            const std::map<std::string, ExecOutcome>& exec,
                            const EvalOptions& options) {
  std::set<std::string> ids;
  for (const PairInput& p : pairs) {
    if (!ids.insert(p.id).second) {
      throw ReportError("duplicate pair id " + p.id);
    }
  }
  for (const auto& [id, outcome] : exec) {
    if (!ids.count(id)) {
      throw ReportError("execution result for unknown pair id " + id);
    }
  }
  MetricReport report;
  report.per_pair = options.policy == ExecPolicy::kParallel
                        ? score_pairs_parallel(pairs, options.kvs_mode)
                        : score_pairs_serial(pairs, options.kvs_mode);
  std::sort(report.per_pair.begin(), report.per_pair.end(),
            [](const PairScores& a, const PairScores& b) { return a.id < b.id; });

  Aggregate& agg = report.aggregate;
  double ex_sum = 0;
  double ex_soft_sum = 0;
  for (PairScores& row : report.per_pair) {
    if (const auto it = exec.find(row.id); it != exec.end()) {
      const ExecOutcome& outcome = it->second;
      row.exec_flag = outcome.flag;
      if (outcome.flag.empty()) {
        row.ex = ex(outcome.pred, outcome.ref);
        row.ex_soft = ex_soft(outcome.pred, outcome.ref);
      } else {
        row.ex = 0.0;
        row.ex_soft = 0.0;
      }
      ex_sum += *row.ex;
      ex_soft_sum += *row.ex_soft;
      ++agg.exec_count;
    }
    agg.em += row.em;
    agg.chrf += row.chrf;
    agg.kvs += row.kvs;
    agg.trees += row.trees;
    agg.oqs += row.oqs;
  }
  agg.count = report.per_pair.size();
  agg.em = mean(agg.em, agg.count);
  agg.chrf = mean(agg.chrf, agg.count);
  agg.kvs = mean(agg.kvs, agg.count);
  agg.trees = mean(agg.trees, agg.count);
  agg.oqs = mean(agg.oqs, agg.count);
  if (agg.exec_count > 0) {
    agg.ex = ex_sum / agg.exec_count;
    agg.ex_soft = ex_soft_sum / agg.exec_count;
  }
  return report;
}

double percent(double score) { return std::round(score * 1000.0) / 10.0; }

nlohmann::json report_to_json(const MetricReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const PairScores& r : report.per_pair) {
    nlohmann::json row{{"id", r.id},       {"em", r.em},
                       {"chrf", r.chrf},   {"kvs", r.kvs},
                       {"trees", r.trees}, {"oqs", r.oqs},
                       {"pred_parsed", r.pred_parsed}};
    if (r.ex) row["ex"] = *r.ex;
    if (r.ex_soft) row["ex_soft"] = *r.ex_soft;
    if (!r.exec_flag.empty()) row["exec_flag"] = r.exec_flag;
    rows.push_back(std::move(row));
  }
  return {{"aggregate", aggregate_json(report.aggregate, true)},
          {"aggregate_raw", aggregate_json(report.aggregate, false)},
          {"per_pair", std::move(rows)}};
}

std::string report_to_csv(const MetricReport& report) {
  const bool with_exec = report.aggregate.exec_count > 0;
  std::ostringstream os;
  os << "id,em,chrf,kvs,trees,oqs";
  if (with_exec) os << ",ex,ex_soft,exec_flag";
  os << "\n";
  for (const PairScores& r : report.per_pair) {
    os << csv_field(r.id) << ',' << format_percent(r.em) << ','
       << format_percent(r.chrf) << ',' << format_percent(r.kvs) << ','
       << format_percent(r.trees) << ',' << format_percent(r.oqs);
    if (with_exec) {
      os << ',' << (r.ex ? format_percent(*r.ex) : "") << ','
         << (r.ex_soft ? format_percent(*r.ex_soft) : "") << ','
         << csv_field(r.exec_flag);
    }
    os << "\n";
  }
  const Aggregate& a = report.aggregate;
  os << "AGGREGATE," << format_percent(a.em) << ',' << format_percent(a.chrf)
     << ',' << format_percent(a.kvs) << ',' << format_percent(a.trees) << ','
     << format_percent(a.oqs);
  if (with_exec) {
    os << ',' << (a.ex ? format_percent(*a.ex) : "") << ','
       << (a.ex_soft ? format_percent(*a.ex_soft) : "") << ',';
  }
  os << "\n";
  return os.str();
}

}  // namespace ovb::metrics
