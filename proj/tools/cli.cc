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


#include "cli.h"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ovb/canonical_tree.h"
#include "ovb/corpus.h"
#include "ovb/embedding.h"
#include "ovb/errors.h"
#include "ovb/io.h"
#include "ovb/knowledge_base.h"
#include "ovb/metrics.h"
#include "ovb/overpass_client.h"
#include "ovb/parallel.h"
#include "ovb/parser.h"
#include "ovb/retrieval.h"
#include "ovb/text.h"

namespace ovb::cli {
namespace {

using nlohmann::json;

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

class Log {
 public:
  Log(std::ostream& err, Level level) : err_(err), level_(level) {}
  void warn(const std::string& m) const { emit(Level::kWarn, "warning", m); }
  void info(const std::string& m) const { emit(Level::kInfo, "info", m); }
  void debug(const std::string& m) const { emit(Level::kDebug, "debug", m); }

 private:
  void emit(Level l, const char* tag, const std::string& m) const {
    if (l <= level_) err_ << tag << ": " << m << "\n";
  }
  std::ostream& err_;
  Level level_;
};

Level parse_level(const std::string& s) {
  if (s == "error") return Level::kError;
  if (s == "warn") return Level::kWarn;
  if (s == "info") return Level::kInfo;
  if (s == "debug") return Level::kDebug;
  throw ValidationError("unknown log level " + s);
}

struct Globals {
  std::string config;
  std::string log_level = "info";
  int jobs = 0;
};

struct ParseArgs {
  std::string input = "-";
  std::string format = "ast-json";
};

struct TagsArgs {
  std::string input = "-";
};

struct EvalArgs {
  std::string pred;
  std::string ref;
  std::string exec_cache;
  std::string endpoint;
  std::string bbox;
  std::string kvs_mode = "items";
  std::string out;
  std::string format;
};

struct ExecEvalArgs {
  std::string pred;
  std::string ref;
  std::string endpoint;
  std::string bbox;
  std::string cache;
  std::string rate = "1/s";
  double timeout = 240;
  int retries = 3;
  double backoff = 1.0;
  std::string kvs_mode = "items";
  std::string out;
  std::string format;
};

struct KbArgs {
  std::string dataset;
  std::string valid_tags;
  std::string provider = "builtin";
  std::string remote_url;
  std::size_t dim = kBuiltinDim;
  std::size_t k_examples = 5;
  std::uint64_t seed = 0;
  std::string generator = "template";
  std::string generator_url;
  double timeout = 30;
  int retries = 2;
  std::string out;
};

struct RetrieveArgs {
  std::string kb;
  std::string valid_tags;
  std::string query;
  std::string queries;
  long long top_j = static_cast<long long>(kDefaultTopJ);
  std::string refiner = "none";
  std::string remote_url;
  std::string embed_url;
  std::string emit = "input";
  double timeout = 30;
  int retries = 2;
};

struct CorpusArgs {
  std::string ovq_nl;
  std::string tag_desc;
  std::string tags;
  std::string plan = "default";
  long long total = -1;
  double mask_rate = 0.15;
  double mean_span = 3.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string manifest;
  std::string holdout;
};

struct CacheArgs {
  std::string cache;
  std::string out = "-";
  std::string archive;
};

void require(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw ValidationError(std::string("missing required option ") + flag);
  }
}

void write_output(const std::string& path, const std::string& contents,
                  std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    io::write_file_atomic(path, contents);
  }
}

std::string id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ValidationError("row id must be a string or integer");
}

// {"id": ..., "text": ...} rows keyed by id.
std::map<std::string, std::string> load_id_text(const std::string& path) {
  std::map<std::string, std::string> rows;
  for (const json& row : io::read_jsonl(path)) {
    if (!row.is_object() || !row.contains("id")) {
      throw ValidationError(path + ": row lacks \"id\"");
    }
    const std::string id = id_string(row["id"]);
    const char* field = row.contains("text") ? "text" : "query";
    std::string text = io::string_field(row, field, path);
    if (!rows.emplace(id, std::move(text)).second) {
      throw ReportError(path + ": duplicate id " + id);
    }
  }
  return rows;
}

std::vector<metrics::PairInput> load_pairs(const std::string& pred_path,
                                           const std::string& ref_path) {
  const auto pred = load_id_text(pred_path);
  const auto ref = load_id_text(ref_path);
  std::vector<metrics::PairInput> pairs;
  for (const auto& [id, text] : ref) {
    const auto it = pred.find(id);
    if (it == pred.end()) throw ReportError("no prediction for id " + id);
    pairs.push_back({id, it->second, text});
  }
  for (const auto& [id, text] : pred) {
    if (!ref.count(id)) throw ReportError("no reference for id " + id);
  }
  return pairs;
}

metrics::KvsMode kvs_mode(const std::string& name) {
  const auto mode = metrics::kvs_mode_from_name(name);
  if (!mode) throw ValidationError("unknown --kvs-mode " + name);
  return *mode;
}

std::optional<overpass::BBox> bbox_or_default(const std::string& text) {
  if (text.empty()) return overpass::kDefaultBBox;
  return overpass::parse_bbox(text);
}

// "2/s", "30/min", or a bare number of requests per second.
double min_interval_from_rate(const std::string& rate) {
  std::string number = rate;
  double per = 1.0;
  if (const std::size_t slash = rate.find('/'); slash != std::string::npos) {
    number = rate.substr(0, slash);
    const std::string unit = rate.substr(slash + 1);
    if (unit == "s") {
      per = 1.0;
    } else if (unit == "min") {
      per = 60.0;
    } else {
      throw ValidationError("unknown rate unit in " + rate);
    }
  }
  char* end = nullptr;
  const double n = std::strtod(number.c_str(), &end);
  if (number.empty() || end != number.c_str() + number.size() || !(n > 0)) {
    throw ValidationError("rate must be positive: " + rate);
  }
  return per / n;
}

std::string render_report(const metrics::MetricReport& report,
                          const std::string& out_path,
                          const std::string& format, json extra) {
  const bool csv = format == "csv" ||
                   (format.empty() && out_path.size() >= 4 &&
                    out_path.compare(out_path.size() - 4, 4, ".csv") == 0);
  if (!format.empty() && format != "csv" && format != "json") {
    throw ValidationError("unknown --format " + format);
  }
  if (csv) return metrics::report_to_csv(report);
  json j = metrics::report_to_json(report);
  for (auto& [k, v] : extra.items()) j[k] = v;
  return j.dump(2) + "\n";
}

void summarize(const metrics::MetricReport& report, const Log& log) {
  const metrics::Aggregate& a = report.aggregate;
  std::ostringstream os;
  os << a.count << " pairs: em " << metrics::percent(a.em) << ", chrf "
     << metrics::percent(a.chrf) << ", kvs " << metrics::percent(a.kvs)
     << ", trees " << metrics::percent(a.trees) << ", oqs "
     << metrics::percent(a.oqs);
  if (a.ex) {
    os << ", ex " << metrics::percent(*a.ex) << ", ex_soft "
       << metrics::percent(*a.ex_soft) << " over " << a.exec_count;
  }
  log.info(os.str());
}

// Options of `app` as a {"flag": value} object, for manifests.
json resolved_config(const CLI::App& app) {
  json j = json::object();
  for (const CLI::App* a = &app; a != nullptr; a = a->get_parent()) {
    for (const CLI::Option* opt : a->get_options()) {
      const std::string name = opt->get_lnames().empty()
                                   ? opt->get_name()
                                   : opt->get_lnames().front();
      if (name == "help" || j.contains(name)) continue;
      const auto& results = opt->results();
      if (!results.empty()) {
        j[name] = results.back();
      } else if (!opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
  }
  return j;
}

void apply_config(const std::string& path, CLI::App& root, CLI::App& leaf,
                  const Log& log) {
  const auto entries = parse_config(io::read_file(path));
  for (const auto& [key, value] : entries) {
    CLI::Option* opt = nullptr;
    for (CLI::App* a = &leaf; a != nullptr && opt == nullptr;
         a = a->get_parent()) {
      opt = a->get_option_no_throw("--" + key);
    }
    if (opt == nullptr) {
      log.debug("config key " + key + " does not apply here");
      continue;
    }
    if (opt->count() > 0) continue;  // flags win over the file
    opt->add_result(value);
    opt->run_callback();
  }
  (void)root;
}

// ---- subcommands ---------------------------------------------------------

int cmd_parse(const ParseArgs& a, std::ostream& out) {
  const std::string source = io::read_file_or_stdin(a.input);
  const ql::QueryAst ast = ql::parse(source);
  if (a.format == "ast-json") {
    out << ql::ast_to_json(ast).dump(2) << "\n";
  } else if (a.format == "canonical-json") {
    out << ql::tree_to_json(ql::canonical_tree(ast)).dump(2) << "\n";
  } else if (a.format == "pretty") {
    out << ql::print(ast) << "\n";
  } else {
    throw ValidationError("unknown --format " + a.format);
  }
  return kExitOk;
}

int cmd_tags(const TagsArgs& a, std::ostream& out) {
  const std::string source = io::read_file_or_stdin(a.input);
  for (const Tag& t : ql::extract_tags(ql::parse(source))) {
    out << tag_to_json(t).dump() << "\n";
  }
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, const CLI::App& app, std::ostream& out,
             const Log& log) {
  require(a.pred, "--pred");
  require(a.ref, "--ref");
  const auto pairs = load_pairs(a.pred, a.ref);
  metrics::EvalOptions options{kvs_mode(a.kvs_mode), ExecPolicy::kParallel};
  std::map<std::string, metrics::ExecOutcome> exec;
  if (!a.exec_cache.empty()) {
    const overpass::ExecCache cache(a.exec_cache);
    const std::string endpoint = overpass::resolve_endpoint(a.endpoint);
    const auto bbox = bbox_or_default(a.bbox);
    std::size_t missing = 0;
    for (const auto& p : pairs) {
      const auto pred = cache.get(overpass::query_hash(p.pred, endpoint, bbox));
      const auto ref = cache.get(overpass::query_hash(p.ref, endpoint, bbox));
      if (!pred || !ref) {
        ++missing;
        continue;
      }
      const overpass::Comparison c = overpass::compare(*pred, *ref);
      metrics::ExecOutcome o;
      o.flag = c.flag;
      if (c.flag.empty()) {
        o.pred = pred->elements;
        o.ref = ref->elements;
      }
      exec[p.id] = std::move(o);
    }
    if (missing > 0) {
      log.warn(std::to_string(missing) +
               " pair(s) have no cached execution; EX omitted for them");
    }
  }
  const metrics::MetricReport report =
      metrics::evaluate_batch(pairs, exec, options);
  write_output(a.out,
               render_report(report, a.out, a.format,
                             {{"config", resolved_config(app)}}),
               out);
  summarize(report, log);
  return kExitOk;
}

int cmd_exec_eval(const ExecEvalArgs& a, const CLI::App& app,
                  std::ostream& out, const Log& log) {
  require(a.pred, "--pred");
  require(a.ref, "--ref");
  if (a.timeout <= 0) throw ValidationError("--timeout must be positive");
  if (a.retries < 0) throw ValidationError("--retries must be >= 0");
  const auto pairs = load_pairs(a.pred, a.ref);
  overpass::ClientOptions options;
  options.endpoint = overpass::resolve_endpoint(a.endpoint);
  options.bbox = bbox_or_default(a.bbox);
  options.min_interval_seconds = min_interval_from_rate(a.rate);
  options.timeout_seconds = a.timeout;
  options.max_retries = a.retries;
  options.backoff_seconds = a.backoff;
  std::unique_ptr<overpass::ExecCache> cache;
  if (!a.cache.empty()) cache = std::make_unique<overpass::ExecCache>(a.cache);
  overpass::OverpassClient client(options, cache.get());
  std::vector<std::string> count_only;
  const auto exec = overpass::execute_pairs(pairs, client, &count_only);
  const metrics::MetricReport report = metrics::evaluate_batch(
      pairs, exec, {kvs_mode(a.kvs_mode), ExecPolicy::kParallel});
  json config = resolved_config(app);
  config["endpoint"] = options.endpoint;
  config["bbox"] = overpass::format_bbox(*options.bbox);
  write_output(a.out,
               render_report(report, a.out, a.format,
                             {{"config", config},
                              {"count_only_ids", count_only},
                              {"network_requests", client.network_requests()}}),
               out);
  log.info(std::to_string(client.network_requests()) +
           " request(s) sent to " + options.endpoint);
  summarize(report, log);
  return kExitOk;
}

int cmd_kb_build(const KbArgs& a, const CLI::App& app, const Log& log) {
  require(a.dataset, "--dataset");
  require(a.valid_tags, "--valid-tags");
  require(a.out, "--out");
  if (a.k_examples == 0) throw ValidationError("--k-examples must be >= 1");
  const http::RetryOptions retry{a.timeout, a.retries, 0.5};
  std::unique_ptr<EmbeddingProvider> provider;
  if (a.provider == "builtin") {
    provider = std::make_unique<HashedNgramProvider>(a.dim);
  } else if (a.provider == "remote") {
    require(a.remote_url, "--remote-url");
    provider = std::make_unique<RemoteEmbeddingProvider>(a.remote_url, a.dim,
                                                         retry);
  } else {
    throw ValidationError("unknown --provider " + a.provider);
  }
  std::unique_ptr<PseudoQueryGenerator> generator;
  if (a.generator == "template") {
    generator = std::make_unique<TemplateGenerator>();
  } else if (a.generator == "remote") {
    require(a.generator_url, "--generator-url");
    generator = std::make_unique<RemoteGenerator>(a.generator_url, retry);
  } else {
    throw ValidationError("unknown --generator " + a.generator);
  }
  const auto dataset = load_dataset(a.dataset);
  const ValidTagSet valid = load_valid_tags(a.valid_tags);
  KbBuildReport report;
  KnowledgeBase kb =
      build_kb(dataset, valid, *generator, *provider,
               {a.k_examples, a.seed, ExecPolicy::kParallel}, &report);
  for (const auto& [tag, why] : report.generator_skips) {
    log.warn("no pseudo-query for " + render_tag(tag) + ": " + why);
  }
  kb = with_config(std::move(kb), resolved_config(app));
  save_kb(kb, a.out);
  log.info(std::to_string(kb.size()) + " entries (" +
           std::to_string(report.observed) + " observed, " +
           std::to_string(report.generated) + " generated); " +
           std::to_string(report.skipped_pairs) +
           " dataset pair(s) without tags skipped; " +
           std::to_string(report.generator_skips.size()) +
           " tag(s) skipped by the generator");
  return kExitOk;
}

std::unique_ptr<EmbeddingProvider> provider_for(const KbHeader& h,
                                                const RetrieveArgs& a) {
  const http::RetryOptions retry{a.timeout, a.retries, 0.5};
  auto builtin = std::make_unique<HashedNgramProvider>(h.dim);
  if (builtin->id() == h.provider) return builtin;
  if (text::starts_with(h.provider, "remote:")) {
    std::string url = a.embed_url;
    if (url.empty()) {
      const std::size_t hash = h.provider.rfind("#d");
      url = h.provider.substr(7, hash == std::string::npos ? std::string::npos
                                                           : hash - 7);
    }
    auto remote = std::make_unique<RemoteEmbeddingProvider>(url, h.dim, retry);
    if (!a.embed_url.empty() && remote->id() != h.provider) {
      throw ValidationError("--embed-url does not match the KB provider " +
                            h.provider);
    }
    return remote;
  }
  throw ValidationError("knowledge base was built with unknown provider " +
                        h.provider);
}

int cmd_retrieve(const RetrieveArgs& a, std::ostream& out, const Log& log) {
  if (a.top_j < 1) throw ValidationError("--top-j must be at least 1");
  require(a.kb, "--kb");
  if (a.query.empty() == a.queries.empty()) {
    throw ValidationError("give exactly one of --query and --queries");
  }
  if (a.emit != "input" && a.emit != "json") {
    throw ValidationError("unknown --emit " + a.emit);
  }
  const KnowledgeBase kb = load_kb(a.kb);
  ValidTagSet valid;
  if (a.valid_tags.empty()) {
    log.warn("no --valid-tags given; every tag will be filtered out");
  } else {
    valid = load_valid_tags(a.valid_tags);
  }
  const auto provider = provider_for(kb.header(), a);
  std::unique_ptr<TagRefiner> refiner;
  if (a.refiner == "none") {
    refiner = std::make_unique<PassThroughRefiner>();
  } else if (a.refiner == "remote") {
    require(a.remote_url, "--remote-url");
    refiner = std::make_unique<RemoteRefiner>(
        a.remote_url, http::RetryOptions{a.timeout, a.retries, 0.5});
  } else {
    throw ValidationError("unknown --refiner " + a.refiner);
  }
  const auto j = static_cast<std::size_t>(a.top_j);
  const auto run_one = [&](const std::string& q) {
    RetrievalResult r = tra(q, kb, *provider, valid, j, *refiner);
    for (const std::string& w : r.warnings) log.warn(w);
    return r;
  };
  if (!a.query.empty()) {
    const RetrievalResult r = run_one(a.query);
    if (a.emit == "input") {
      out << augmented_input(r) << "\n";
    } else {
      out << result_to_json(r, kb).dump() << "\n";
    }
    return kExitOk;
  }
  std::size_t n = 0;
  for (const json& row : io::read_jsonl(a.queries)) {
    const char* field = row.contains("query") ? "query" : "text";
    const RetrievalResult r = run_one(io::string_field(row, field, a.queries));
    json j_out = result_to_json(r, kb);
    if (row.contains("id")) j_out["id"] = row["id"];
    out << j_out.dump() << "\n";
    ++n;
  }
  log.info(std::to_string(n) + " queries retrieved");
  return kExitOk;
}

void collect_strings(const json& v, std::vector<std::string>& out) {
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
  } else if (v.is_object() || v.is_array()) {
    for (const json& x : v) collect_strings(x, out);
  }
}

int cmd_corpus_build(const CorpusArgs& a, const CLI::App& app,
                     const Log& log) {
  require(a.ovq_nl, "--ovq-nl");
  require(a.out, "--out");
  CorpusSources raw;
  json files = json::object();
  for (const DatasetPair& p : load_dataset(a.ovq_nl)) {
    raw.ovq_nl.emplace_back(p.gold, p.query);
  }
  files["ovq_nl"] = text::sha256_hex(io::read_file(a.ovq_nl));
  if (!a.tag_desc.empty()) {
    for (const json& row : io::read_jsonl(a.tag_desc)) {
      std::string tag = row.contains("key") ? render_tag(tag_from_json(row))
                                            : io::string_field(row, "tag",
                                                               a.tag_desc);
      const char* d = row.contains("description") ? "description" : "desc";
      raw.tag_desc.emplace_back(std::move(tag),
                                io::string_field(row, d, a.tag_desc));
    }
    files["tag_desc"] = text::sha256_hex(io::read_file(a.tag_desc));
  }
  NormalizedTags normalized;
  if (!a.tags.empty()) {
    std::vector<RawTriple> triples;
    for (const json& row : io::read_jsonl(a.tags)) {
      RawTriple t;
      t.key = row.value("key", "");
      t.relation = row.contains("relation") && row["relation"].is_string()
                       ? row["relation"].get<std::string>()
                       : (row.contains("value") && row["value"].is_string()
                              ? "="
                              : "exists");
      if (row.contains("value") && row["value"].is_string()) {
        t.value = row["value"].get<std::string>();
      }
      triples.push_back(std::move(t));
    }
    normalized = normalize_triples(triples);
    raw.tags = normalized.tags;
    files["tags"] = text::sha256_hex(io::read_file(a.tags));
  }
  std::vector<std::string> holdout;
  if (!a.holdout.empty()) {
    for (const json& row : io::read_jsonl(a.holdout)) {
      collect_strings(row, holdout);
    }
    files["holdout"] = text::sha256_hex(io::read_file(a.holdout));
  }
  CorpusBuildOptions options;
  if (a.plan != "default") {
    options.plan = plan_from_json(json::parse(io::read_file(a.plan)));
  }
  if (a.total >= 0) options.plan.total = static_cast<std::size_t>(a.total);
  options.mlm = {a.mask_rate, a.mean_span};
  options.seed = a.seed;
  SourceCleaning cleaning;
  const CorpusSources sources = clean_sources(raw, &cleaning);
  Corpus corpus = build_corpus(sources, holdout, options);
  corpus.manifest["config"] = resolved_config(app);
  corpus.manifest["cleaning"] = cleaning_to_json(cleaning);
  corpus.manifest["cleaning"]["malformed_tags"] = normalized.dropped;
  corpus.manifest["source_files"] = files;
  io::write_file_atomic(a.out, corpus_to_jsonl(corpus));
  const std::string manifest =
      a.manifest.empty() ? a.out + ".manifest.json" : a.manifest;
  io::write_file_atomic(manifest, corpus.manifest.dump(2) + "\n");
  log.info(std::to_string(corpus.examples.size()) + " examples written to " +
           a.out + "; manifest " + manifest);
  return kExitOk;
}

int cmd_cache_export(const CacheArgs& a, std::ostream& out, const Log& log) {
  require(a.cache, "--cache");
  if (!std::filesystem::is_directory(a.cache)) {
    throw IoError("cache directory " + a.cache + " does not exist");
  }
  const overpass::ExecCache cache(a.cache);
  const std::string archive = cache.export_archive();
  write_output(a.out, archive, out);
  log.info(std::to_string(std::count(archive.begin(), archive.end(), '\n')) +
           " record(s) exported");
  return kExitOk;
}

int cmd_cache_import(const CacheArgs& a, const Log& log) {
  require(a.cache, "--cache");
  require(a.archive, "--archive");
  const overpass::ExecCache cache(a.cache);
  const std::size_t n = cache.import_archive(io::read_file(a.archive));
  log.info(std::to_string(n) + " record(s) imported into " + a.cache);
  return kExitOk;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config(
    const std::string& contents) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(contents);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const std::string_view trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    const std::size_t eq = trimmed.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            " is not key = value");
    }
    std::string key(text::trim(trimmed.substr(0, eq)));
    std::string value(text::trim(trimmed.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            " has an empty key");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Text-to-OverpassQL toolkit: parsing, scoring, tag retrieval "
               "and corpus construction.",
               "ovb"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Flat key = value file of flag defaults");
  app.add_option("--log-level", g.log_level, "error, warn, info or debug")
      ->capture_default_str();
  app.add_option("--jobs", g.jobs, "Worker threads for batch kernels (0 = all)")
      ->capture_default_str();

  ParseArgs parse_args;
  CLI::App* parse = app.add_subcommand("parse", "Print the AST or canonical tree");
  parse->add_option("input", parse_args.input, "Query file, or - for stdin")
      ->capture_default_str();
  parse->add_option("--format", parse_args.format,
                    "ast-json, canonical-json or pretty")
      ->capture_default_str();

  TagsArgs tags_args;
  CLI::App* tags = app.add_subcommand("tags", "Print extracted tags as JSON lines");
  tags->add_option("input", tags_args.input, "Query file, or - for stdin")
      ->capture_default_str();

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Score predictions against references");
  eval->add_option("--pred", eval_args.pred, "Predictions, JSONL {id, text}");
  eval->add_option("--ref", eval_args.ref, "References, JSONL {id, text}");
  eval->add_option("--exec-cache", eval_args.exec_cache,
                   "Execution cache directory for EX columns");
  eval->add_option("--endpoint", eval_args.endpoint,
                   "Endpoint the cache was filled from");
  eval->add_option("--bbox", eval_args.bbox, "s,w,n,e used for {{bbox}}");
  eval->add_option("--kvs-mode", eval_args.kvs_mode, "items or pairs-only")
      ->capture_default_str();
  eval->add_option("--out", eval_args.out, "report.json or report.csv (default stdout)");
  eval->add_option("--format", eval_args.format, "json or csv (default from --out)");

  ExecEvalArgs exec_args;
  CLI::App* exec = app.add_subcommand(
      "exec-eval", "Execute both sides against Overpass and score with EX");
  exec->add_option("--pred", exec_args.pred, "Predictions, JSONL {id, text}");
  exec->add_option("--ref", exec_args.ref, "References, JSONL {id, text}");
  exec->add_option("--endpoint", exec_args.endpoint,
                   "Interpreter URL (OVERPASS_URL overrides)");
  exec->add_option("--bbox", exec_args.bbox, "s,w,n,e used for {{bbox}}");
  exec->add_option("--cache", exec_args.cache, "Execution cache directory");
  exec->add_option("--rate", exec_args.rate, "Request rate, e.g. 1/s or 30/min")
      ->capture_default_str();
  exec->add_option("--timeout", exec_args.timeout, "Per-request timeout in seconds")
      ->capture_default_str();
  exec->add_option("--retries", exec_args.retries, "Retries on HTTP 429/504")
      ->capture_default_str();
  exec->add_option("--backoff", exec_args.backoff, "First retry delay in seconds")
      ->capture_default_str();
  exec->add_option("--kvs-mode", exec_args.kvs_mode, "items or pairs-only")
      ->capture_default_str();
  exec->add_option("--out", exec_args.out, "report.json or report.csv (default stdout)");
  exec->add_option("--format", exec_args.format, "json or csv (default from --out)");

  KbArgs kb_args;
  CLI::App* kb = app.add_subcommand("kb", "Tag knowledge base");
  kb->require_subcommand(1);
  CLI::App* kb_build = kb->add_subcommand("build", "Build a knowledge base file");
  kb_build->add_option("--dataset", kb_args.dataset,
                       "Training pairs, JSONL {query, gold}");
  kb_build->add_option("--valid-tags", kb_args.valid_tags,
                       "Valid tags, JSONL {key, relation, value}");
  kb_build->add_option("--provider", kb_args.provider, "builtin or remote")
      ->capture_default_str();
  kb_build->add_option("--remote-url", kb_args.remote_url,
                       "Embedding endpoint for --provider remote");
  kb_build->add_option("--dim", kb_args.dim, "Embedding dimension")
      ->capture_default_str();
  kb_build->add_option("--k-examples", kb_args.k_examples,
                       "Exemplars per generation prompt")
      ->capture_default_str();
  kb_build->add_option("--seed", kb_args.seed, "Seed for exemplar selection")
      ->capture_default_str();
  kb_build->add_option("--generator", kb_args.generator, "template or remote")
      ->capture_default_str();
  kb_build->add_option("--generator-url", kb_args.generator_url,
                       "Completion endpoint for --generator remote");
  kb_build->add_option("--timeout", kb_args.timeout,
                       "Remote call timeout in seconds")
      ->capture_default_str();
  kb_build->add_option("--retries", kb_args.retries, "Remote call retries")
      ->capture_default_str();
  kb_build->add_option("--out", kb_args.out, "Output .ovbk file");

  RetrieveArgs ret_args;
  CLI::App* ret = app.add_subcommand("retrieve", "Retrieve tags for a request");
  ret->add_option("--kb", ret_args.kb, "Knowledge base file");
  ret->add_option("--valid-tags", ret_args.valid_tags, "Valid tags, JSONL");
  ret->add_option("--query", ret_args.query, "One request");
  ret->add_option("--queries", ret_args.queries,
                  "Batch of requests, JSONL {id, query}");
  ret->add_option("--top-j", ret_args.top_j, "Neighbors to aggregate")
      ->capture_default_str();
  ret->add_option("--refiner", ret_args.refiner, "none or remote")
      ->capture_default_str();
  ret->add_option("--remote-url", ret_args.remote_url,
                  "Completion endpoint for --refiner remote");
  ret->add_option("--embed-url", ret_args.embed_url,
                  "Embedding endpoint for remotely embedded knowledge bases");
  ret->add_option("--emit", ret_args.emit, "input or json (single query)")
      ->capture_default_str();
  ret->add_option("--timeout", ret_args.timeout, "Remote call timeout in seconds")
      ->capture_default_str();
  ret->add_option("--retries", ret_args.retries, "Remote call retries")
      ->capture_default_str();

  CorpusArgs corpus_args;
  CLI::App* corpus = app.add_subcommand("corpus", "Pre-training corpus");
  corpus->require_subcommand(1);
  CLI::App* corpus_build =
      corpus->add_subcommand("build", "Build a pre-training corpus");
  corpus_build->add_option("--ovq-nl", corpus_args.ovq_nl,
                           "Query/question pairs, JSONL {ovq, nl}");
  corpus_build->add_option("--tag-desc", corpus_args.tag_desc,
                           "Tag/description pairs, JSONL {tag, description}");
  corpus_build->add_option("--tags", corpus_args.tags,
                           "Tag triples, JSONL {key, relation, value}");
  corpus_build->add_option("--plan", corpus_args.plan,
                           "default or a plan JSON file")
      ->capture_default_str();
  corpus_build->add_option("--total", corpus_args.total,
                           "Total examples (default: largest feasible)");
  corpus_build->add_option("--mask-rate", corpus_args.mask_rate,
                           "Fraction of characters masked")
      ->capture_default_str();
  corpus_build->add_option("--mean-span", corpus_args.mean_span,
                           "Mean masked span length")
      ->capture_default_str();
  corpus_build->add_option("--seed", corpus_args.seed, "Seed")
      ->capture_default_str();
  corpus_build->add_option("--out", corpus_args.out, "Output corpus JSONL");
  corpus_build->add_option("--manifest", corpus_args.manifest,
                           "Manifest path (default <out>.manifest.json)");
  corpus_build->add_option("--holdout", corpus_args.holdout,
                           "Validation split, JSONL; none of its strings may leak");

  CacheArgs cache_args;
  CLI::App* cache = app.add_subcommand("cache", "Execution cache archives");
  cache->require_subcommand(1);
  CLI::App* cache_export = cache->add_subcommand("export", "Write the cache as JSONL");
  cache_export->add_option("--cache", cache_args.cache, "Cache directory");
  cache_export->add_option("--out", cache_args.out, "Archive path (default stdout)")
      ->capture_default_str();
  CLI::App* cache_import = cache->add_subcommand("import", "Load a JSONL archive");
  cache_import->add_option("--cache", cache_args.cache, "Cache directory");
  cache_import->add_option("--archive", cache_args.archive, "Archive path");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  CLI::App* leaf = &app;
  while (!leaf->get_subcommands().empty()) leaf = leaf->get_subcommands().front();

  try {
    const Log early(err, Level::kInfo);
    if (!g.config.empty()) apply_config(g.config, app, *leaf, early);
    const Log log(err, parse_level(g.log_level));
    if (g.jobs < 0) throw ValidationError("--jobs must be >= 0");
    set_worker_threads(g.jobs);

    if (leaf == parse) return cmd_parse(parse_args, out);
    if (leaf == tags) return cmd_tags(tags_args, out);
    if (leaf == eval) return cmd_eval(eval_args, *leaf, out, log);
    if (leaf == exec) return cmd_exec_eval(exec_args, *leaf, out, log);
    if (leaf == kb_build) return cmd_kb_build(kb_args, *leaf, log);
    if (leaf == ret) return cmd_retrieve(ret_args, out, log);
    if (leaf == corpus_build) return cmd_corpus_build(corpus_args, *leaf, log);
    if (leaf == cache_export) return cmd_cache_export(cache_args, out, log);
    if (leaf == cache_import) return cmd_cache_import(cache_args, log);
    err << app.help();
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const json::exception& e) {
    err << "error: malformed JSON input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace ovb::cli
