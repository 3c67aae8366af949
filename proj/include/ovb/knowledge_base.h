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


// Tag knowledge base: (query, embedding, tags) entries seeded from a
// text-to-query dataset and topped up with pseudo-queries for every valid
// tag the dataset does not cover.

#ifndef OVB_KNOWLEDGE_BASE_H_
#define OVB_KNOWLEDGE_BASE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ovb/embedding.h"
#include "ovb/http.h"
#include "ovb/parallel.h"
#include "ovb/tag.h"

namespace ovb {

enum class EntryOrigin { kObserved, kGenerated };

std::string_view origin_name(EntryOrigin origin);

struct KnowledgeEntry {
  std::string query;
  EmbeddingVector embedding;  // empty until finalize()
  TagSet tags;
  EntryOrigin origin = EntryOrigin::kObserved;
};

struct ValidTagSet {
  TagSet entries;
  std::string source;

  bool contains(const Tag& tag) const { return entries.count(tag) > 0; }
  // Any valid tag with this key (a pair tag implies its key is valid).
  bool contains_key(std::string_view key) const;
};

// Rows {"key":..., "relation":..., "value":...|null, "count":...}. The
// source string is "<file name>@sha256:<digest>".
ValidTagSet load_valid_tags(const std::filesystem::path& path);
ValidTagSet valid_tags_from_rows(std::span<const nlohmann::json> rows,
                                 std::string source);

struct DatasetPair {
  std::string query;  // natural language
  std::string gold;   // OverpassQL
};

// Rows {"query" | "nl" | "text": ..., "gold" | "ovq" | "overpassql": ...}.
std::vector<DatasetPair> load_dataset(const std::filesystem::path& path);

struct SeedResult {
  std::vector<KnowledgeEntry> entries;
  std::size_t skipped = 0;  // gold queries with no tags or no parse
};

SeedResult seed_from_dataset(std::span<const DatasetPair> dataset);

struct Exemplar {
  std::string description;
  Tag tag;
};

// k exemplars drawn from `existing` with the given seed. The same draw is
// reused for every tag.
std::vector<Exemplar> select_exemplars(std::span<const KnowledgeEntry> existing,
                                       std::size_t k, std::uint64_t seed);

// Few-shot prompt asking for a pseudo-query that needs `tag`.
std::string generation_prompt(const Tag& tag,
                              std::span<const Exemplar> exemplars);

struct GenerationRequest {
  const Tag& tag;
  std::span<const Exemplar> exemplars;
  const std::string& prompt;
};

class PseudoQueryGenerator {
 public:
  virtual ~PseudoQueryGenerator() = default;
  virtual std::string id() const = 0;
  // Throws GeneratorError.
  virtual std::string generate(const GenerationRequest& request) const = 0;
};

// Offline generator: "<value> <key> features on the map" with underscores
// read as spaces. Ignores the prompt.
class TemplateGenerator : public PseudoQueryGenerator {
 public:
  std::string id() const override { return "template"; }
  std::string generate(const GenerationRequest& request) const override;
};

// POST {"prompt": ...} -> {"text": ...}.
class RemoteGenerator : public PseudoQueryGenerator {
 public:
  explicit RemoteGenerator(std::string url, http::RetryOptions options = {});
  std::string id() const override { return "remote:" + url_; }
  std::string generate(const GenerationRequest& request) const override;

 private:
  std::string url_;
  http::RetryOptions options_;
};

struct CoverageResult {
  std::vector<KnowledgeEntry> entries;
  std::vector<std::pair<Tag, std::string>> skipped;  // tag, error message
};

// One generated entry per valid tag that no existing entry carries.
CoverageResult generate_coverage(const ValidTagSet& valid,
                                 std::span<const KnowledgeEntry> existing,
                                 const PseudoQueryGenerator& generator,
                                 std::size_t k_examples, std::uint64_t seed);

struct KbHeader {
  std::string provider;
  std::size_t dim = 0;
  std::size_t count = 0;
  std::string valid_tags_source;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();  // resolved run config
};

// Immutable once built. Entry ids are positions.
class KnowledgeBase {
 public:
  const KbHeader& header() const { return header_; }
  const std::vector<KnowledgeEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const KnowledgeEntry& entry(std::size_t id) const { return entries_.at(id); }
  // L2 norm of the stored float32 embedding, in double.
  double norm(std::size_t id) const { return norms_.at(id); }

 private:
  void compute_norms();

  friend KnowledgeBase finalize(std::vector<KnowledgeEntry>,
                                const EmbeddingProvider&, std::string,
                                std::uint64_t, ExecPolicy);
  friend KnowledgeBase parse_kb(std::string_view);
  friend KnowledgeBase with_config(KnowledgeBase, nlohmann::json);

  KbHeader header_;
  std::vector<KnowledgeEntry> entries_;
  std::vector<double> norms_;
};

// Embeds every entry. Throws EmptyKbError, or ProviderError without
// producing a KB.
KnowledgeBase finalize(std::vector<KnowledgeEntry> entries,
                       const EmbeddingProvider& provider,
                       std::string valid_tags_source, std::uint64_t seed,
                       ExecPolicy policy = ExecPolicy::kParallel);

// Copy of kb whose header records the given run config.
KnowledgeBase with_config(KnowledgeBase kb, nlohmann::json config);

inline constexpr std::string_view kKbMagic = "OVBK1\n";

std::string serialize_kb(const KnowledgeBase& kb);
KnowledgeBase parse_kb(std::string_view bytes);
void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path);
KnowledgeBase load_kb(const std::filesystem::path& path);

struct KbBuildOptions {
  std::size_t k_examples = 5;
  std::uint64_t seed = 0;
  ExecPolicy policy = ExecPolicy::kParallel;
};

struct KbBuildReport {
  std::size_t observed = 0;
  std::size_t skipped_pairs = 0;
  std::size_t generated = 0;
  std::vector<std::pair<Tag, std::string>> generator_skips;
};

// seed_from_dataset + generate_coverage + finalize.
KnowledgeBase build_kb(std::span<const DatasetPair> dataset,
                       const ValidTagSet& valid,
                       const PseudoQueryGenerator& generator,
                       const EmbeddingProvider& provider,
                       const KbBuildOptions& options,
                       KbBuildReport* report = nullptr);

}  // namespace ovb

#endif  // OVB_KNOWLEDGE_BASE_H_
