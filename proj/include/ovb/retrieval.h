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


// Tag retrieval: embed the request, rank KB entries by cosine similarity,
// union the tags of the top j, refine, and keep only valid tags.

#ifndef OVB_RETRIEVAL_H_
#define OVB_RETRIEVAL_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ovb/embedding.h"
#include "ovb/http.h"
#include "ovb/knowledge_base.h"
#include "ovb/parallel.h"
#include "ovb/tag.h"

namespace ovb {

inline constexpr std::size_t kDefaultTopJ = 20;

struct Neighbor {
  std::size_t id;
  double similarity;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Cosine similarity of the query against every entry, in entry order,
// accumulated in double over the stored float32 values.
std::vector<double> similarity_scan_serial(const KnowledgeBase& kb,
                                           std::span<const float> query);
std::vector<double> similarity_scan_parallel(const KnowledgeBase& kb,
                                             std::span<const float> query);

// The j best scores, similarity descending, ties by ascending id.
std::vector<Neighbor> top_j(std::span<const double> similarities,
                            std::size_t j);

struct Retrieval {
  std::vector<Neighbor> neighbors;
  TagSet t_ret;
};

// Throws EmptyKbError, or ValidationError for an empty query, j == 0 or a
// provider that does not match the KB header.
Retrieval retrieve(std::string_view query, const KnowledgeBase& kb,
                   const EmbeddingProvider& provider, std::size_t j,
                   ExecPolicy policy = ExecPolicy::kParallel);

// Prompt asking a model to keep only the tags the request needs.
std::string refinement_prompt(std::string_view query, const TagSet& t_ret);

struct RefineRequest {
  std::string_view query;
  const TagSet& t_ret;
  const std::string& prompt;
};

class TagRefiner {
 public:
  virtual ~TagRefiner() = default;
  virtual std::string id() const = 0;
  // Throws RefinerError.
  virtual TagSet refine(const RefineRequest& request) const = 0;
};

class PassThroughRefiner : public TagRefiner {
 public:
  std::string id() const override { return "none"; }
  TagSet refine(const RefineRequest& request) const override {
    return request.t_ret;
  }
};

// POST {"prompt": ...} -> {"text": ...}; tags are read from the reply text
// in the rendered ["k"="v"] form.
class RemoteRefiner : public TagRefiner {
 public:
  explicit RemoteRefiner(std::string url, http::RetryOptions options = {});
  std::string id() const override { return "remote:" + url_; }
  TagSet refine(const RefineRequest& request) const override;

 private:
  std::string url_;
  http::RetryOptions options_;
};

struct Refinement {
  TagSet tags;
  std::size_t dropped = 0;    // refiner output outside t_ret
  bool fell_back = false;     // refiner failed; pass-through used
  std::vector<std::string> warnings;
};

// Never throws on refiner failure.
Refinement refine(std::string_view query, const TagSet& t_ret,
                  const TagRefiner& refiner);

struct RetrievalResult {
  std::string query;
  std::vector<Neighbor> neighbors;
  TagSet t_ret;
  TagSet t_ref;
  TagSet t_valid;
  std::size_t refiner_dropped = 0;
  bool refiner_fell_back = false;
  std::vector<std::string> warnings;
};

RetrievalResult tra(std::string_view query, const KnowledgeBase& kb,
                    const EmbeddingProvider& provider,
                    const ValidTagSet& valid, std::size_t j,
                    const TagRefiner& refiner,
                    ExecPolicy policy = ExecPolicy::kParallel);

inline constexpr std::string_view kTagsSeparator = "<TAGS>";

// "<query>\n<TAGS>\n" followed by one rendered tag per line in TagSet
// order, or the bare query when t_valid is empty.
std::string augmented_input(const RetrievalResult& result);

nlohmann::json result_to_json(const RetrievalResult& result,
                              const KnowledgeBase& kb);

}  // namespace ovb

#endif  // OVB_RETRIEVAL_H_
