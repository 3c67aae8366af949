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


#include "ovb/knowledge_base.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "ovb/errors.h"
#include "ovb/io.h"
#include "ovb/parser.h"
#include "ovb/random.h"
#include "ovb/text.h"

namespace ovb {
namespace {

std::string spaced(std::string_view s) {
  std::string out(s);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

void append_le_floats(std::string& out, const EmbeddingVector& v) {
  for (float f : v) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b) {
      out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
    }
  }
}

EmbeddingVector read_le_floats(std::string_view bytes, std::size_t dim) {
  EmbeddingVector v(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(
                  static_cast<unsigned char>(bytes[4 * i + b]))
              << (8 * b);
    }
    v[i] = std::bit_cast<float>(bits);
  }
  return v;
}

std::string_view next_line(std::string_view bytes, std::size_t& pos) {
  const std::size_t end = bytes.find('\n', pos);
  if (end == std::string_view::npos) {
    throw ValidationError("truncated knowledge base file");
  }
  const std::string_view line = bytes.substr(pos, end - pos);
  pos = end + 1;
  return line;
}

nlohmann::json parse_json_line(std::string_view line, std::string_view what) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("malformed knowledge base " + std::string(what));
  }
}

const char* first_string_field(const nlohmann::json& row,
                               std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (row.contains(n) && row[n].is_string()) return n;
  }
  return nullptr;
}

}  // namespace

std::string_view origin_name(EntryOrigin origin) {
  return origin == EntryOrigin::kObserved ? "observed" : "generated";
}

bool ValidTagSet::contains_key(std::string_view key) const {
  for (const Tag& t : entries) {
    if (t.key() == key) return true;
  }
  return false;
}

ValidTagSet valid_tags_from_rows(std::span<const nlohmann::json> rows,
                                 std::string source) {
  ValidTagSet valid;
  valid.source = std::move(source);
  for (const nlohmann::json& row : rows) valid.entries.insert(tag_from_json(row));
  return valid;
}

ValidTagSet load_valid_tags(const std::filesystem::path& path) {
  const std::string contents = io::read_file(path);
  const auto rows = io::parse_jsonl(contents, path.string());
  return valid_tags_from_rows(rows, path.filename().string() + "@sha256:" +
                                        text::sha256_hex(contents));
}

std::vector<DatasetPair> load_dataset(const std::filesystem::path& path) {
  std::vector<DatasetPair> out;
  for (const nlohmann::json& row : io::read_jsonl(path)) {
    const char* q = first_string_field(row, {"query", "nl", "text"});
    const char* g = first_string_field(row, {"gold", "ovq", "overpassql"});
    if (!q || !g) {
      throw ValidationError(path.string() +
                            ": dataset row needs a question and a query");
    }
    out.push_back({row[q].get<std::string>(), row[g].get<std::string>()});
  }
  return out;
}

SeedResult seed_from_dataset(std::span<const DatasetPair> dataset) {
  SeedResult result;
  for (const DatasetPair& pair : dataset) {
    TagSet tags;
    try {
      tags = ql::extract_tags(ql::parse(pair.gold));
    } catch (const ValidationError&) {
      tags = scan_tags(pair.gold);
    }
    if (tags.empty()) {
      ++result.skipped;
      continue;
    }
    result.entries.push_back(
        {pair.query, {}, std::move(tags), EntryOrigin::kObserved});
  }
  return result;
}

std::vector<Exemplar> select_exemplars(std::span<const KnowledgeEntry> existing,
                                       std::size_t k, std::uint64_t seed) {
  SeededRng rng(derive_seed(seed, 0));
  std::vector<Exemplar> out;
  for (std::size_t i : rng.sample_indices(existing.size(), k)) {
    out.push_back({existing[i].query, *existing[i].tags.begin()});
  }
  return out;
}

std::string generation_prompt(const Tag& tag,
                              std::span<const Exemplar> exemplars) {
  std::ostringstream os;
  os << "Write one short request a map user could type to find "
        "OpenStreetMap features carrying the tag below. Reply with the "
        "request only.\n\n";
  for (const Exemplar& e : exemplars) {
    os << "Tag: " << render_tag(e.tag) << "\nRequest: " << e.description
       << "\n\n";
  }
  os << "Tag: " << render_tag(tag) << "\nRequest:";
  return os.str();
}

std::string TemplateGenerator::generate(
    const GenerationRequest& request) const {
  const Tag& t = request.tag;
  const std::string key = spaced(t.key());
  switch (t.relation()) {
    case TagRelation::kEquals:
      return spaced(*t.value()) + " " + key + " features on the map";
    case TagRelation::kExists:
      return key + " features on the map";
    case TagRelation::kNotExists:
      return "features without " + key + " on the map";
    case TagRelation::kNotEquals:
      return key + " features other than " + spaced(*t.value()) +
             " on the map";
    default:
      return key + " features matching " + *t.value() + " on the map";
  }
}

RemoteGenerator::RemoteGenerator(std::string url, http::RetryOptions options)
    : url_(std::move(url)), options_(options) {}

std::string RemoteGenerator::generate(const GenerationRequest& request) const {
  nlohmann::json reply;
  try {
    reply = http::post_json(url_, {{"prompt", request.prompt}}, options_);
  } catch (const Error& e) {
    throw GeneratorError(e.what());
  }
  if (!reply.contains("text") || !reply["text"].is_string()) {
    throw GeneratorError("generator reply from " + url_ + " lacks \"text\"");
  }
  const std::string text =
      text::collapse_whitespace(reply["text"].get<std::string>());
  if (text.empty()) throw GeneratorError("generator returned empty text");
  return text;
}

CoverageResult generate_coverage(const ValidTagSet& valid,
                                 std::span<const KnowledgeEntry> existing,
                                 const PseudoQueryGenerator& generator,
                                 std::size_t k_examples, std::uint64_t seed) {
  if (k_examples == 0) throw ValidationError("k_examples must be positive");
  TagSet covered;
  for (const KnowledgeEntry& e : existing) {
    covered.insert(e.tags.begin(), e.tags.end());
  }
  const std::vector<Exemplar> exemplars =
      select_exemplars(existing, k_examples, seed);
  CoverageResult result;
  for (const Tag& tag : valid.entries) {
    if (covered.count(tag)) continue;
    const std::string prompt = generation_prompt(tag, exemplars);
    try {
      std::string q = generator.generate({tag, exemplars, prompt});
      result.entries.push_back(
          {std::move(q), {}, TagSet{tag}, EntryOrigin::kGenerated});
    } catch (const GeneratorError& e) {
      result.skipped.emplace_back(tag, e.what());
    }
  }
  return result;
}

KnowledgeBase finalize(std::vector<KnowledgeEntry> entries,
                       const EmbeddingProvider& provider,
                       std::string valid_tags_source, std::uint64_t seed,
                       ExecPolicy policy) {
  if (entries.empty()) throw EmptyKbError();
  std::vector<std::string> texts;
  texts.reserve(entries.size());
  for (const KnowledgeEntry& e : entries) {
    if (e.tags.empty()) {
      throw ValidationError("knowledge entry without tags: " + e.query);
    }
    texts.push_back(e.query);
  }
  std::vector<EmbeddingVector> vectors = embed_all(provider, texts, policy);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (vectors[i].size() != provider.dim()) {
      throw ProviderError("provider returned the wrong dimension");
    }
    entries[i].embedding = std::move(vectors[i]);
  }
  KnowledgeBase kb;
  kb.header_ = {provider.id(), provider.dim(), entries.size(),
                std::move(valid_tags_source), seed};
  kb.entries_ = std::move(entries);
  kb.compute_norms();
  return kb;
}

std::string serialize_kb(const KnowledgeBase& kb) {
  const KbHeader& h = kb.header();
  std::string out(kKbMagic);
  out += nlohmann::json{{"config", h.config},
                        {"count", h.count},
                        {"dim", h.dim},
                        {"provider", h.provider},
                        {"seed", h.seed},
                        {"valid_tags_source", h.valid_tags_source}}
             .dump();
  out.push_back('\n');
  for (std::size_t i = 0; i < kb.size(); ++i) {
    const KnowledgeEntry& e = kb.entry(i);
    nlohmann::json tags = nlohmann::json::array();
    for (const Tag& t : e.tags) tags.push_back(tag_to_json(t));
    out += nlohmann::json{{"id", i},
                          {"origin", origin_name(e.origin)},
                          {"query", e.query},
                          {"tags", std::move(tags)}}
               .dump();
    out.push_back('\n');
    append_le_floats(out, e.embedding);
  }
  return out;
}

KnowledgeBase parse_kb(std::string_view bytes) {
  if (!text::starts_with(bytes, kKbMagic)) {
    throw ValidationError("not a knowledge base file (bad magic)");
  }
  std::size_t pos = kKbMagic.size();
  const nlohmann::json header = parse_json_line(next_line(bytes, pos), "header");
  KnowledgeBase kb;
  try {
    kb.header_.count = header.at("count").get<std::size_t>();
    kb.header_.dim = header.at("dim").get<std::size_t>();
    kb.header_.provider = header.at("provider").get<std::string>();
    kb.header_.seed = header.at("seed").get<std::uint64_t>();
    kb.header_.valid_tags_source =
        header.at("valid_tags_source").get<std::string>();
    kb.header_.config = header.value("config", nlohmann::json::object());
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("knowledge base header is incomplete");
  }
  const std::size_t stride = 4 * kb.header_.dim;
  for (std::size_t i = 0; i < kb.header_.count; ++i) {
    const nlohmann::json meta = parse_json_line(next_line(bytes, pos), "entry");
    if (bytes.size() - pos < stride) {
      throw ValidationError("truncated knowledge base embedding");
    }
    KnowledgeEntry e;
    try {
      e.query = meta.at("query").get<std::string>();
      e.origin = meta.at("origin").get<std::string>() == "generated"
                     ? EntryOrigin::kGenerated
                     : EntryOrigin::kObserved;
      for (const nlohmann::json& t : meta.at("tags")) {
        e.tags.insert(tag_from_json(t));
      }
    } catch (const nlohmann::json::exception&) {
      throw ValidationError("knowledge base entry " + std::to_string(i) +
                            " is incomplete");
    }
    e.embedding = read_le_floats(bytes.substr(pos, stride), kb.header_.dim);
    pos += stride;
    kb.entries_.push_back(std::move(e));
  }
  if (pos != bytes.size()) {
    throw ValidationError("trailing bytes after knowledge base entries");
  }
  kb.compute_norms();
  return kb;
}

void KnowledgeBase::compute_norms() {
  norms_.clear();
  for (const KnowledgeEntry& e : entries_) {
    norms_.push_back(std::sqrt(dot(e.embedding, e.embedding)));
  }
}

KnowledgeBase with_config(KnowledgeBase kb, nlohmann::json config) {
  kb.header_.config = std::move(config);
  return kb;
}

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize_kb(kb));
}

KnowledgeBase load_kb(const std::filesystem::path& path) {
  return parse_kb(io::read_file(path));
}

KnowledgeBase build_kb(std::span<const DatasetPair> dataset,
                       const ValidTagSet& valid,
                       const PseudoQueryGenerator& generator,
                       const EmbeddingProvider& provider,
                       const KbBuildOptions& options, KbBuildReport* report) {
  SeedResult seeded = seed_from_dataset(dataset);
  CoverageResult generated = generate_coverage(
      valid, seeded.entries, generator, options.k_examples, options.seed);
  if (report) {
    report->observed = seeded.entries.size();
    report->skipped_pairs = seeded.skipped;
    report->generated = generated.entries.size();
    report->generator_skips = generated.skipped;
  }
  std::vector<KnowledgeEntry> entries = std::move(seeded.entries);
  for (KnowledgeEntry& e : generated.entries) entries.push_back(std::move(e));
  return finalize(std::move(entries), provider, valid.source, options.seed,
                  options.policy);
}

}  // namespace ovb
