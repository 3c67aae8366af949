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


#include "ovb/retrieval.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ovb/errors.h"

namespace ovb {
namespace {

bool ranks_before(const Neighbor& a, const Neighbor& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.id < b.id;
}

nlohmann::json tags_json(const TagSet& tags) {
  nlohmann::json out = nlohmann::json::array();
  for (const Tag& t : tags) out.push_back(tag_to_json(t));
  return out;
}

double query_norm(std::span<const float> query) {
  return std::sqrt(dot(query, query));
}

double cosine(const KnowledgeBase& kb, std::size_t i,
              std::span<const float> query, double qnorm) {
  return dot(kb.entry(i).embedding, query) / (kb.norm(i) * qnorm);
}

}  // namespace

std::vector<double> similarity_scan_serial(const KnowledgeBase& kb,
                                           std::span<const float> query) {
  const double qnorm = query_norm(query);
  std::vector<double> sims(kb.size());
  for (std::size_t i = 0; i < kb.size(); ++i) {
    sims[i] = cosine(kb, i, query, qnorm);
  }
  return sims;
}

std::vector<double> similarity_scan_parallel(const KnowledgeBase& kb,
                                             std::span<const float> query) {
  const double qnorm = query_norm(query);
  std::vector<double> sims(kb.size());
  const auto n = static_cast<std::ptrdiff_t>(kb.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    sims[i] = cosine(kb, static_cast<std::size_t>(i), query, qnorm);
  }
  return sims;
}

std::vector<Neighbor> top_j(std::span<const double> similarities,
                            std::size_t j) {
  std::vector<Neighbor> all(similarities.size());
  for (std::size_t i = 0; i < similarities.size(); ++i) {
    all[i] = {i, similarities[i]};
  }
  const std::size_t keep = std::min(j, all.size());
  std::partial_sort(all.begin(), all.begin() + keep, all.end(), ranks_before);
  all.resize(keep);
  return all;
}

Retrieval retrieve(std::string_view query, const KnowledgeBase& kb,
                   const EmbeddingProvider& provider, std::size_t j,
                   ExecPolicy policy) {
  if (kb.size() == 0) throw EmptyKbError();
  if (j == 0) throw ValidationError("top-j must be positive");
  if (query.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw ValidationError("retrieval query is empty");
  }
  if (provider.id() != kb.header().provider ||
      provider.dim() != kb.header().dim) {
    throw ValidationError("embedding provider " + provider.id() +
                          " does not match the knowledge base provider " +
                          kb.header().provider);
  }
  const EmbeddingVector q = provider.embed(query);
  const std::vector<double> sims = policy == ExecPolicy::kParallel
                                       ? similarity_scan_parallel(kb, q)
                                       : similarity_scan_serial(kb, q);
  Retrieval r;
  r.neighbors = top_j(sims, j);
  for (const Neighbor& n : r.neighbors) {
    const TagSet& tags = kb.entry(n.id).tags;
    r.t_ret.insert(tags.begin(), tags.end());
  }
  return r;
}

std::string refinement_prompt(std::string_view query, const TagSet& t_ret) {
  std::ostringstream os;
  os << "Request: " << query << "\n\nCandidate OpenStreetMap tags:\n";
  for (const Tag& t : t_ret) os << render_tag(t) << "\n";
  os << "\nList the candidate tags needed to answer the request, one per "
        "line, copied exactly. Leave out redundant or unrelated tags.";
  return os.str();
}

RemoteRefiner::RemoteRefiner(std::string url, http::RetryOptions options)
    : url_(std::move(url)), options_(options) {}

TagSet RemoteRefiner::refine(const RefineRequest& request) const {
  nlohmann::json reply;
  try {
    reply = http::post_json(url_, {{"prompt", request.prompt}}, options_);
  } catch (const Error& e) {
    throw RefinerError(e.what());
  }
  if (!reply.contains("text") || !reply["text"].is_string()) {
    throw RefinerError("refiner reply from " + url_ + " lacks \"text\"");
  }
  return scan_tags(reply["text"].get<std::string>());
}

Refinement refine(std::string_view query, const TagSet& t_ret,
                  const TagRefiner& refiner) {
  Refinement out;
  const std::string prompt = refinement_prompt(query, t_ret);
  TagSet proposed;
  try {
    proposed = refiner.refine({query, t_ret, prompt});
  } catch (const RefinerError& e) {
    out.fell_back = true;
    out.warnings.push_back(std::string("refiner failed, using retrieved tags: ") +
                           e.what());
    out.tags = t_ret;
    return out;
  }
  for (const Tag& raw : proposed) {
    const Tag t = Tag::make(raw.key(), raw.relation(),
                            raw.value() ? std::optional<std::string_view>(
                                              *raw.value())
                                        : std::nullopt);
    if (t_ret.count(t)) {
      out.tags.insert(t);
    } else {
      ++out.dropped;
      out.warnings.push_back("refiner proposed " + render_tag(t) +
                             ", which was not retrieved; dropped");
    }
  }
  return out;
}

RetrievalResult tra(std::string_view query, const KnowledgeBase& kb,
                    const EmbeddingProvider& provider,
                    const ValidTagSet& valid, std::size_t j,
                    const TagRefiner& refiner, ExecPolicy policy) {
  Retrieval r = retrieve(query, kb, provider, j, policy);
  Refinement refined = refine(query, r.t_ret, refiner);
  RetrievalResult out;
  out.query = std::string(query);
  out.neighbors = std::move(r.neighbors);
  out.t_ret = std::move(r.t_ret);
  out.t_ref = std::move(refined.tags);
  for (const Tag& t : out.t_ref) {
    if (valid.contains(t)) out.t_valid.insert(t);
  }
  out.refiner_dropped = refined.dropped;
  out.refiner_fell_back = refined.fell_back;
  out.warnings = std::move(refined.warnings);
  return out;
}

std::string augmented_input(const RetrievalResult& result) {
  if (result.t_valid.empty()) return result.query;
  std::string out = result.query;
  out += "\n";
  out += kTagsSeparator;
  for (const Tag& t : result.t_valid) {
    out += "\n";
    out += render_tag(t);
  }
  return out;
}

nlohmann::json result_to_json(const RetrievalResult& result,
                              const KnowledgeBase& kb) {
  nlohmann::json neighbors = nlohmann::json::array();
  for (const Neighbor& n : result.neighbors) {
    neighbors.push_back({{"id", n.id},
                         {"query", kb.entry(n.id).query},
                         {"similarity", n.similarity}});
  }
  return {{"query", result.query},
          {"neighbors", std::move(neighbors)},
          {"t_ret", tags_json(result.t_ret)},
          {"t_ref", tags_json(result.t_ref)},
          {"t_valid", tags_json(result.t_valid)},
          {"refiner_dropped", result.refiner_dropped},
          {"refiner_fell_back", result.refiner_fell_back},
          {"input", augmented_input(result)}};
}

}  // namespace ovb
