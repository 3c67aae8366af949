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


#include "ovb/corpus.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>

#include "ovb/errors.h"
#include "ovb/parser.h"
#include "ovb/random.h"
#include "ovb/text.h"

namespace ovb {
namespace {

constexpr std::string_view kSentinelOpen = "⟨M";
constexpr std::string_view kSentinelClose = "⟩";

constexpr std::array<std::string_view, 6> kTypeNames = {
    "ovq", "nl", "tag", "tag_desc", "tag_desc_pair", "ovq_nl_pair"};

std::string normalized(std::string_view s) {
  return text::collapse_whitespace(text::nfc(s));
}

// Items one data type draws from: single texts for MLM types, (input,
// target) pairs for BT types.
struct Pool {
  std::vector<std::string> texts;
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t ineligible = 0;

  std::size_t available() const {
    return texts.empty() ? pairs.size() : texts.size();
  }
};

bool mlm_eligible(std::string_view s, const MlmParams& p) {
  if (text::find_invalid_utf8(s)) return false;
  if (s.find(kSentinelOpen) != std::string_view::npos) return false;
  const std::size_t n = text::decode_utf8(s).size();
  return n >= 2 && static_cast<double>(n) >= p.mean_span;
}

void add_texts(Pool& pool, const std::vector<std::string>& items,
               const MlmParams& p) {
  std::set<std::string> seen;
  for (const std::string& s : items) {
    if (!seen.insert(s).second) continue;
    if (mlm_eligible(s, p)) {
      pool.texts.push_back(s);
    } else {
      ++pool.ineligible;
    }
  }
}

std::map<DataType, Pool> make_pools(const CorpusSources& src,
                                    const MlmParams& p) {
  std::map<DataType, Pool> pools;
  std::vector<std::string> ovq, nl, tags, descs;
  for (const auto& [q, n] : src.ovq_nl) {
    ovq.push_back(q);
    nl.push_back(n);
  }
  for (const Tag& t : src.tags) tags.push_back(render_tag(t));
  for (const auto& [t, d] : src.tag_desc) descs.push_back(d);
  add_texts(pools[DataType::kOvq], ovq, p);
  add_texts(pools[DataType::kNl], nl, p);
  add_texts(pools[DataType::kTag], tags, p);
  add_texts(pools[DataType::kTagDesc], descs, p);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& pr : src.tag_desc) {
    if (seen.insert(pr).second) pools[DataType::kTagDescPair].pairs.push_back(pr);
  }
  seen.clear();
  for (const auto& pr : src.ovq_nl) {
    if (seen.insert(pr).second) pools[DataType::kOvqNlPair].pairs.push_back(pr);
  }
  return pools;
}

// Items a type needs for `count` examples.
std::size_t items_needed(DataType type, std::size_t count) {
  return objective_of(type) == Objective::kBt ? count / 2 : count;
}

bool feasible(const PartitionPlan& plan, std::size_t total,
              const std::map<DataType, Pool>& pools, DataType* short_type) {
  for (const auto& [type, count] : planned_counts(plan, total)) {
    if (items_needed(type, count) > pools.at(type).available()) {
      if (short_type) *short_type = type;
      return false;
    }
  }
  return true;
}

std::size_t max_feasible_total(const PartitionPlan& plan,
                               const std::map<DataType, Pool>& pools) {
  double bound = 1e18;
  for (const auto& [type, frac] : plan.proportions) {
    if (frac <= 0) continue;
    const double per_item = objective_of(type) == Objective::kBt ? 2.0 : 1.0;
    bound = std::min(bound,
                     (pools.at(type).available() * per_item + 2.0) / frac);
  }
  auto total = static_cast<std::size_t>(std::ceil(bound));
  while (total > 0 && !feasible(plan, total, pools, nullptr)) --total;
  return total;
}

std::string source_checksum(const std::vector<std::string>& items) {
  return text::sha256_hex(nlohmann::json(items).dump());
}

struct Job {
  DataType type;
  std::size_t item;      // index into the pool
  bool reversed = false;  // BT direction
};

}  // namespace

std::string_view data_type_name(DataType type) {
  return kTypeNames[static_cast<std::size_t>(type)];
}

std::optional<DataType> data_type_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i) {
    if (kTypeNames[i] == name) return static_cast<DataType>(i);
  }
  return std::nullopt;
}

std::string_view objective_name(Objective objective) {
  return objective == Objective::kMlm ? "mlm" : "bt";
}

Objective objective_of(DataType type) {
  return type == DataType::kTagDescPair || type == DataType::kOvqNlPair
             ? Objective::kBt
             : Objective::kMlm;
}

nlohmann::json example_to_json(const CorpusExample& e) {
  return {{"data_type", data_type_name(e.data_type)},
          {"objective", objective_name(e.objective)},
          {"input", e.input},
          {"target", e.target},
          {"seed_trace", {{"seed", e.seed}, {"index", e.index}}}};
}

NormalizedTags normalize_triples(std::span<const RawTriple> raw) {
  NormalizedTags out;
  for (const RawTriple& r : raw) {
    const auto relation = relation_from_symbol(text::trim(r.relation));
    if (!relation) {
      ++out.dropped;
      continue;
    }
    std::optional<std::string_view> value;
    if (relation_has_value(*relation) && r.value) value = *r.value;
    try {
      out.tags.push_back(Tag::make(r.key, *relation, value));
    } catch (const ValidationError&) {
      ++out.dropped;
    }
  }
  return out;
}

DedupResult dedup(std::span<const std::string> items) {
  DedupResult out;
  std::set<std::string> seen;
  for (const std::string& item : items) {
    std::string n = normalized(item);
    if (seen.insert(n).second) {
      out.items.push_back(std::move(n));
    } else {
      ++out.duplicates;
    }
  }
  return out;
}

DedupResult dedup_queries(std::span<const std::string> queries) {
  std::vector<std::string> corrected;
  std::size_t dropped = 0;
  for (const std::string& q : queries) {
    try {
      const ql::QueryAst ast = ql::parse(q);
      const std::size_t bytes = text::trim(q).size();
      if (bytes == 0 || 2 * ql::raw_bytes(ast) > bytes) {
        ++dropped;
        continue;
      }
      corrected.push_back(ql::print(ast));
    } catch (const ValidationError&) {
      ++dropped;
    }
  }
  DedupResult out = dedup(corrected);
  out.dropped = dropped;
  return out;
}

std::string sentinel(std::size_t i) {
  return std::string(kSentinelOpen) + std::to_string(i) +
         std::string(kSentinelClose);
}

CorpusExample emit_mlm(std::string_view source, const MlmParams& params,
                       std::uint64_t seed, DataType type, std::size_t index) {
  if (!(params.mask_rate > 0 && params.mask_rate < 1)) {
    throw ValidationError("mask rate must lie strictly between 0 and 1");
  }
  if (!(params.mean_span >= 1)) {
    throw ValidationError("mean span must be at least 1");
  }
  if (text::find_invalid_utf8(source)) {
    throw DegenerateInput("text is not valid UTF-8");
  }
  if (source.find(kSentinelOpen) != std::string_view::npos) {
    throw DegenerateInput("text already contains a sentinel marker");
  }
  const std::u32string cps = text::decode_utf8(source);
  const std::size_t len = cps.size();
  if (len < 2 || static_cast<double>(len) < params.mean_span) {
    throw DegenerateInput("text is shorter than one span");
  }
  const auto noise = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(len * params.mask_rate)), 1,
      len - 1);

  SeededRng rng(derive_seed(seed, index));
  std::vector<std::size_t> spans;
  std::size_t covered = 0;
  while (covered < noise) {
    const std::size_t s = std::min(rng.geometric(params.mean_span),
                                   noise - covered);
    spans.push_back(s);
    covered += s;
  }
  while (spans.size() > 1 && spans.size() - 1 > len - noise) {
    spans[spans.size() - 2] += spans.back();
    spans.pop_back();
  }
  const std::size_t m = spans.size();
  const std::size_t free_slots = len - noise - (m - 1);
  std::vector<std::size_t> bars = rng.sample_indices(free_slots + m, m);
  std::sort(bars.begin(), bars.end());
  std::vector<std::size_t> gaps(m + 1);
  gaps[0] = bars[0];
  // Inner gaps carry one mandatory separator on top of their share.
  for (std::size_t k = 1; k < m; ++k) gaps[k] = bars[k] - bars[k - 1];
  gaps[m] = free_slots + m - 1 - bars[m - 1];

  CorpusExample ex;
  ex.data_type = type;
  ex.objective = Objective::kMlm;
  ex.seed = seed;
  ex.index = index;
  const std::u32string_view view(cps);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < m; ++k) {
    ex.input += text::encode_utf8(view.substr(pos, gaps[k]));
    pos += gaps[k];
    const std::string mark = sentinel(k + 1);
    ex.input += mark;
    ex.target += mark;
    ex.target += text::encode_utf8(view.substr(pos, spans[k]));
    pos += spans[k];
  }
  ex.input += text::encode_utf8(view.substr(pos, gaps[m]));
  return ex;
}

std::string reconstruct(const CorpusExample& ex) {
  std::map<std::string, std::string> fills;
  std::size_t pos = 0;
  while (pos < ex.target.size()) {
    const std::size_t close = ex.target.find(kSentinelClose, pos);
    if (ex.target.compare(pos, kSentinelOpen.size(), kSentinelOpen) != 0 ||
        close == std::string::npos) {
      throw ValidationError("malformed MLM target");
    }
    const std::string mark =
        ex.target.substr(pos, close + kSentinelClose.size() - pos);
    pos = close + kSentinelClose.size();
    std::size_t next = ex.target.find(kSentinelOpen, pos);
    if (next == std::string::npos) next = ex.target.size();
    fills[mark] = ex.target.substr(pos, next - pos);
    pos = next;
  }
  std::string out;
  pos = 0;
  while (pos < ex.input.size()) {
    const std::size_t open = ex.input.find(kSentinelOpen, pos);
    if (open == std::string::npos) {
      out += ex.input.substr(pos);
      break;
    }
    out += ex.input.substr(pos, open - pos);
    const std::size_t close = ex.input.find(kSentinelClose, open);
    if (close == std::string::npos) throw ValidationError("malformed MLM input");
    const std::string mark =
        ex.input.substr(open, close + kSentinelClose.size() - open);
    const auto it = fills.find(mark);
    if (it == fills.end()) throw ValidationError("sentinel without a span");
    out += it->second;
    pos = close + kSentinelClose.size();
  }
  return out;
}

std::pair<CorpusExample, CorpusExample> emit_bt(std::string_view a,
                                                std::string_view b,
                                                DataType type,
                                                std::uint64_t seed,
                                                std::size_t index) {
  if (text::trim(a).empty() || text::trim(b).empty()) {
    throw ValidationError("translation pair has an empty side");
  }
  CorpusExample fwd{type, Objective::kBt, std::string(a), std::string(b), seed,
                    index};
  CorpusExample back{type, Objective::kBt, std::string(b), std::string(a),
                     seed, index + 1};
  return {std::move(fwd), std::move(back)};
}

PartitionPlan default_plan() {
  PartitionPlan plan;
  plan.proportions = {{DataType::kOvq, 0.20},         {DataType::kNl, 0.20},
                      {DataType::kTag, 0.254},        {DataType::kTagDesc, 0.073},
                      {DataType::kTagDescPair, 0.073}, {DataType::kOvqNlPair, 0.20}};
  return plan;
}

void validate_plan(const PartitionPlan& plan) {
  double sum = 0;
  for (const auto& [type, frac] : plan.proportions) {
    if (frac < 0) throw ValidationError("negative plan fraction");
    sum += frac;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("plan fractions sum to " + std::to_string(sum) +
                          ", not 1");
  }
}

PartitionPlan plan_from_json(const nlohmann::json& j) {
  PartitionPlan plan;
  if (!j.is_object() || !j.contains("proportions") ||
      !j["proportions"].is_object()) {
    throw ValidationError("plan needs a \"proportions\" object");
  }
  for (const auto& [name, frac] : j["proportions"].items()) {
    const auto type = data_type_from_name(name);
    if (!type) throw ValidationError("unknown data type in plan: " + name);
    if (!frac.is_number()) throw ValidationError("plan fraction not a number");
    plan.proportions[*type] = frac.get<double>();
  }
  if (j.contains("total") && !j["total"].is_null()) {
    plan.total = j["total"].get<std::size_t>();
  }
  validate_plan(plan);
  return plan;
}

std::map<DataType, std::size_t> planned_counts(const PartitionPlan& plan,
                                               std::size_t total) {
  std::map<DataType, std::size_t> counts;
  for (const auto& [type, frac] : plan.proportions) {
    auto n = static_cast<std::size_t>(std::llround(frac * total));
    if (objective_of(type) == Objective::kBt) n -= n % 2;
    counts[type] = n;
  }
  return counts;
}

CorpusSources clean_sources(const CorpusSources& raw, SourceCleaning* stats) {
  SourceCleaning local;
  SourceCleaning& st = stats ? *stats : local;
  CorpusSources out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [q, nl] : raw.ovq_nl) {
    const std::string one[] = {q};
    const DedupResult fixed = dedup_queries(one);
    if (fixed.items.empty()) {
      ++st.dropped_queries;
      continue;
    }
    std::pair<std::string, std::string> pr{fixed.items.front(), normalized(nl)};
    if (seen.insert(pr).second) {
      out.ovq_nl.push_back(std::move(pr));
    } else {
      ++st.duplicate_pairs;
    }
  }
  seen.clear();
  for (const auto& [t, d] : raw.tag_desc) {
    std::pair<std::string, std::string> pr{normalized(t), normalized(d)};
    if (seen.insert(pr).second) {
      out.tag_desc.push_back(std::move(pr));
    } else {
      ++st.duplicate_tag_desc;
    }
  }
  std::set<Tag> tags;
  for (const Tag& t : raw.tags) {
    if (tags.insert(t).second) {
      out.tags.push_back(t);
    } else {
      ++st.duplicate_tags;
    }
  }
  return out;
}

nlohmann::json cleaning_to_json(const SourceCleaning& s) {
  return {{"dropped_queries", s.dropped_queries},
          {"duplicate_pairs", s.duplicate_pairs},
          {"duplicate_tag_desc", s.duplicate_tag_desc},
          {"duplicate_tags", s.duplicate_tags}};
}

Corpus build_corpus(const CorpusSources& sources,
                    std::span<const std::string> holdout,
                    const CorpusBuildOptions& options) {
  validate_plan(options.plan);
  const PartitionPlan& plan = options.plan;

  std::set<std::string> held;
  for (const std::string& h : holdout) {
    held.insert(normalized(h));
    try {
      const ql::QueryAst ast = ql::parse(h);
      if (ql::raw_bytes(ast) == 0) held.insert(ql::print(ast));
    } catch (const ValidationError&) {
    }
  }
  held.erase("");
  std::vector<std::string> leaks;
  const auto check = [&](const std::string& s) {
    if (held.count(normalized(s))) leaks.push_back(s);
  };
  for (const auto& [q, n] : sources.ovq_nl) {
    check(q);
    check(n);
  }
  for (const auto& [t, d] : sources.tag_desc) {
    check(t);
    check(d);
  }
  for (const Tag& t : sources.tags) check(render_tag(t));
  if (!leaks.empty()) {
    throw LeakageError(std::to_string(leaks.size()) +
                       " source string(s) also occur in the holdout split, "
                       "first: " + leaks.front());
  }

  const std::map<DataType, Pool> pools = make_pools(sources, options.mlm);
  std::size_t total;
  if (plan.total) {
    total = *plan.total;
    DataType short_type{};
    if (!feasible(plan, total, pools, &short_type)) {
      throw PlanInfeasible(
          "source for " + std::string(data_type_name(short_type)) + " has " +
          std::to_string(pools.at(short_type).available()) +
          " usable items, too few for its share of " + std::to_string(total) +
          " examples");
    }
  } else {
    total = max_feasible_total(plan, pools);
  }
  const auto counts = planned_counts(plan, total);

  std::vector<Job> jobs;
  for (const auto& [type, count] : counts) {
    const Pool& pool = pools.at(type);
    SeededRng pick(derive_seed(options.seed,
                               0x100 + static_cast<std::uint64_t>(type)));
    const std::vector<std::size_t> chosen =
        pick.sample_indices(pool.available(), items_needed(type, count));
    for (std::size_t item : chosen) {
      jobs.push_back({type, item, false});
      if (objective_of(type) == Objective::kBt) jobs.push_back({type, item, true});
    }
  }
  SeededRng order(derive_seed(options.seed, 0x200));
  order.shuffle(jobs);

  Corpus corpus;
  corpus.examples.resize(jobs.size());
  const auto emit = [&](std::size_t i) {
    const Job& job = jobs[i];
    const Pool& pool = pools.at(job.type);
    if (objective_of(job.type) == Objective::kMlm) {
      corpus.examples[i] = emit_mlm(pool.texts[job.item], options.mlm,
                                    options.seed, job.type, i);
    } else {
      const auto& [a, b] = pool.pairs[job.item];
      auto pair = emit_bt(a, b, job.type, options.seed, i);
      corpus.examples[i] = job.reversed ? std::move(pair.second)
                                        : std::move(pair.first);
      corpus.examples[i].index = i;
    }
  };
  const auto n = static_cast<std::ptrdiff_t>(jobs.size());
  if (options.policy == ExecPolicy::kParallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        emit(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(ovb_corpus_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) emit(static_cast<std::size_t>(i));
  }

  nlohmann::json count_json = nlohmann::json::object();
  nlohmann::json achieved = nlohmann::json::object();
  nlohmann::json planned = nlohmann::json::object();
  nlohmann::json ineligible = nlohmann::json::object();
  for (const auto& [type, count] : counts) {
    const std::string name(data_type_name(type));
    count_json[name + "/" + std::string(objective_name(objective_of(type)))] =
        count;
    achieved[name] = jobs.empty() ? 0.0 : static_cast<double>(count) / jobs.size();
    planned[name] = plan.proportions.at(type);
    ineligible[name] = pools.at(type).ineligible;
  }
  std::vector<std::string> ovq, nl, tags, td;
  for (const auto& [q, x] : sources.ovq_nl) {
    ovq.push_back(q);
    nl.push_back(x);
  }
  for (const auto& [t, d] : sources.tag_desc) {
    td.push_back(t);
    td.push_back(d);
  }
  for (const Tag& t : sources.tags) tags.push_back(render_tag(t));
  corpus.manifest = {
      {"seed", options.seed},
      {"total", jobs.size()},
      {"planned_total", total},
      {"counts", std::move(count_json)},
      {"proportions_planned", std::move(planned)},
      {"proportions_achieved", std::move(achieved)},
      {"mlm_ineligible", std::move(ineligible)},
      {"mlm", {{"mask_rate", options.mlm.mask_rate},
               {"mean_span", options.mlm.mean_span}}},
      {"holdout_strings", held.size()},
      {"source_checksums",
       {{"ovq", source_checksum(ovq)},
        {"nl", source_checksum(nl)},
        {"tag_desc", source_checksum(td)},
        {"tags", source_checksum(tags)}}}};
  return corpus;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const CorpusExample& e : corpus.examples) {
    out += example_to_json(e).dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace ovb
