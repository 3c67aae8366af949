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


#ifndef OVB_EMBEDDING_H_
#define OVB_EMBEDDING_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ovb/http.h"
#include "ovb/parallel.h"

namespace ovb {

// L2-normalized embedding. Stored as float32, the on-disk precision.
using EmbeddingVector = std::vector<float>;

inline constexpr std::size_t kBuiltinDim = 512;
inline constexpr std::size_t kBuiltinMinOrder = 3;
inline constexpr std::size_t kBuiltinMaxOrder = 5;

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  // Recorded in the KB header; a KB is only queried with the provider that
  // built it.
  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;

  // Throws ProviderError; never returns a zero vector.
  virtual EmbeddingVector embed(std::string_view text) const = 0;

  // Default implementation embeds one text at a time.
  virtual std::vector<EmbeddingVector> embed_batch(
      std::span<const std::string> texts) const;

  // True when embed() may be called from several threads at once.
  virtual bool thread_safe() const { return false; }
};

// Hashed character n-gram term frequencies (n = 3..5) folded into dim
// buckets with a signed FNV-1a hash. Input is ASCII-lowercased, whitespace
// collapsed and padded with one space on each side.
class HashedNgramProvider : public EmbeddingProvider {
 public:
  explicit HashedNgramProvider(std::size_t dim = kBuiltinDim);

  std::string id() const override;
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override;
  bool thread_safe() const override { return true; }

  // Bucket and sign of one n-gram; exposed for tests.
  struct Feature {
    std::size_t bucket;
    int sign;
  };
  Feature feature(std::string_view ngram) const;

  // The n-grams of the normalized text, in order, with repeats.
  static std::vector<std::string> ngrams(std::string_view text);

 private:
  std::size_t dim_;
};

// POST {"texts": [...]} -> {"vectors": [[...], ...]}.
class RemoteEmbeddingProvider : public EmbeddingProvider {
 public:
  RemoteEmbeddingProvider(std::string url, std::size_t dim,
                          http::RetryOptions options = {},
                          std::size_t batch_size = 64);

  std::string id() const override;
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(
      std::span<const std::string> texts) const override;

 private:
  std::string url_;
  std::size_t dim_;
  http::RetryOptions options_;
  std::size_t batch_size_;
};

// Scales to unit length in double precision. Throws ProviderError on a zero
// or non-finite vector.
EmbeddingVector normalize_embedding(const std::vector<double>& raw);

// Embeds every text in order. The parallel path fans out only when the
// provider is thread safe; results are identical either way.
std::vector<EmbeddingVector> embed_all(const EmbeddingProvider& provider,
                                       std::span<const std::string> texts,
                                       ExecPolicy policy);

double dot(std::span<const float> a, std::span<const float> b);

}  // namespace ovb

#endif  // OVB_EMBEDDING_H_
