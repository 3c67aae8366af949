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


#include "ovb/embedding.h"

#include <cmath>
#include <exception>

#include "json.hpp"
#include "ovb/errors.h"
#include "ovb/text.h"

namespace ovb {

std::vector<EmbeddingVector> EmbeddingProvider::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(embed(t));
  return out;
}

EmbeddingVector normalize_embedding(const std::vector<double>& raw) {
  double norm2 = 0;
  for (double v : raw) norm2 += v * v;
  if (!(norm2 > 0) || !std::isfinite(norm2)) {
    throw ProviderError("embedding is a zero vector");
  }
  const double inv = 1.0 / std::sqrt(norm2);
  EmbeddingVector out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = static_cast<float>(raw[i] * inv);
  }
  return out;
}

HashedNgramProvider::HashedNgramProvider(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ValidationError("embedding dimension must be positive");
}

std::string HashedNgramProvider::id() const {
  return "builtin-hashed-ngram-3-5-d" + std::to_string(dim_);
}

std::vector<std::string> HashedNgramProvider::ngrams(std::string_view text) {
  const std::u32string cps = text::decode_utf8(
      " " + text::ascii_lower(text::collapse_whitespace(text)) + " ");
  std::vector<std::string> out;
  for (std::size_t n = kBuiltinMinOrder; n <= kBuiltinMaxOrder; ++n) {
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      out.push_back(text::encode_utf8(std::u32string_view(cps).substr(i, n)));
    }
  }
  return out;
}

HashedNgramProvider::Feature HashedNgramProvider::feature(
    std::string_view ngram) const {
  const std::uint64_t h = text::fnv1a64(ngram);
  return {static_cast<std::size_t>(h % dim_), (h >> 63) ? -1 : 1};
}

EmbeddingVector HashedNgramProvider::embed(std::string_view text) const {
  std::vector<double> raw(dim_, 0.0);
  for (const std::string& g : ngrams(text)) {
    const Feature f = feature(g);
    raw[f.bucket] += f.sign;
  }
  return normalize_embedding(raw);
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(std::string url,
                                                 std::size_t dim,
                                                 http::RetryOptions options,
                                                 std::size_t batch_size)
    : url_(std::move(url)),
      dim_(dim),
      options_(options),
      batch_size_(batch_size == 0 ? 1 : batch_size) {
  if (dim == 0) throw ValidationError("embedding dimension must be positive");
}

std::string RemoteEmbeddingProvider::id() const {
  return "remote:" + url_ + "#d" + std::to_string(dim_);
}

EmbeddingVector RemoteEmbeddingProvider::embed(std::string_view text) const {
  const std::string one(text);
  return embed_batch(std::span<const std::string>(&one, 1)).front();
}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
    const auto chunk = texts.subspan(
        start, std::min(batch_size_, texts.size() - start));
    nlohmann::json reply;
    try {
      reply = http::post_json(
          url_, {{"texts", std::vector<std::string>(chunk.begin(), chunk.end())}},
          options_);
    } catch (const IoError& e) {
      throw ProviderError(e.what());
    } catch (const ValidationError& e) {
      throw ProviderError(e.what());
    }
    if (!reply.contains("vectors") || !reply["vectors"].is_array() ||
        reply["vectors"].size() != chunk.size()) {
      throw ProviderError("embedding reply from " + url_ +
                          " lacks one vector per text");
    }
    for (const nlohmann::json& v : reply["vectors"]) {
      if (!v.is_array() || v.size() != dim_) {
        throw ProviderError("embedding reply from " + url_ +
                            " has the wrong dimension");
      }
      std::vector<double> raw;
      raw.reserve(dim_);
      for (const nlohmann::json& x : v) {
        if (!x.is_number()) throw ProviderError("non-numeric embedding value");
        raw.push_back(x.get<double>());
      }
      out.push_back(normalize_embedding(raw));
    }
  }
  return out;
}

std::vector<EmbeddingVector> embed_all(const EmbeddingProvider& provider,
                                       std::span<const std::string> texts,
                                       ExecPolicy policy) {
  if (policy == ExecPolicy::kSerial || !provider.thread_safe()) {
    return provider.embed_batch(texts);
  }
  std::vector<EmbeddingVector> out(texts.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = provider.embed(texts[i]);
    } catch (...) {
#pragma omp critical(ovb_embed_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return s;
}

}  // namespace ovb
