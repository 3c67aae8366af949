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


#include "ovb/overpass_client.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <regex>
#include <thread>

#include "ovb/errors.h"
#include "ovb/http.h"
#include "ovb/io.h"
#include "ovb/lexer.h"
#include "ovb/text.h"

namespace ovb::overpass {
namespace {

std::string format_coord(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    out.emplace_back(line.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  for (std::string& f : out) {
    if (!f.empty() && f.back() == '\r') f.pop_back();
  }
  return out;
}

int column(const std::vector<std::string>& header,
           std::initializer_list<std::string_view> names) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    for (std::string_view n : names) {
      if (header[i] == n) return static_cast<int>(i);
    }
  }
  return -1;
}

std::optional<std::int64_t> to_int64(std::string_view s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

ElementRef derived(std::string key) {
  return {ElementKind::kDerived, 0, std::move(key)};
}

}  // namespace

BBox parse_bbox(std::string_view text) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 4) {
    throw ValidationError("bbox must be south,west,north,east: " +
                          std::string(text));
  }
  double v[4];
  for (int i = 0; i < 4; ++i) {
    const std::string p(ovb::text::trim(parts[i]));
    char* end = nullptr;
    v[i] = std::strtod(p.c_str(), &end);
    if (p.empty() || end != p.c_str() + p.size() || !std::isfinite(v[i])) {
      throw ValidationError("bbox value is not a number: " + p);
    }
  }
  const BBox b{v[0], v[1], v[2], v[3]};
  if (b.south < -90 || b.north > 90 || b.south > b.north || b.west < -180 ||
      b.east > 180) {
    throw ValidationError("bbox out of range: " + std::string(text));
  }
  return b;
}

std::string format_bbox(const BBox& b) {
  return format_coord(b.south) + "," + format_coord(b.west) + "," +
         format_coord(b.north) + "," + format_coord(b.east);
}

std::string prepare(std::string_view query, const std::optional<BBox>& bbox) {
  std::vector<ql::Span> holes;
  std::vector<std::string> names;
  try {
    for (const ql::Token& t : ql::tokenize(query)) {
      if (t.kind != ql::TokenKind::kTemplatePlaceholder) continue;
      holes.push_back(t.span);
      names.push_back(t.text);
    }
  } catch (const LexError&) {
    // Unlexable queries still get textual substitution; the server reports
    // the syntax error.
    std::size_t pos = 0;
    while ((pos = query.find("{{", pos)) != std::string_view::npos) {
      const std::size_t end = query.find("}}", pos);
      if (end == std::string_view::npos) break;
      holes.push_back({pos, end + 2});
      names.emplace_back(query.substr(pos, end + 2 - pos));
      pos = end + 2;
    }
  }
  std::string out;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < holes.size(); ++i) {
    const std::string_view inner =
        ovb::text::trim(std::string_view(names[i]).substr(2, names[i].size() - 4));
    if (inner != "bbox") throw UnsupportedPlaceholder(names[i]);
    if (!bbox) throw MissingBBox();
    out.append(query.substr(pos, holes[i].start - pos));
    out += format_bbox(*bbox);
    pos = holes[i].end;
  }
  out.append(query.substr(pos));
  return out;
}

std::string_view status_name(ExecStatus status) {
  switch (status) {
    case ExecStatus::kOk: return "ok";
    case ExecStatus::kTimeout: return "timeout";
    case ExecStatus::kSyntaxError: return "syntax-error";
    case ExecStatus::kRemoteError: return "remote-error";
  }
  return "remote-error";
}

std::optional<ExecStatus> status_from_name(std::string_view name) {
  for (ExecStatus s : {ExecStatus::kOk, ExecStatus::kTimeout,
                       ExecStatus::kSyntaxError, ExecStatus::kRemoteError}) {
    if (status_name(s) == name) return s;
  }
  return std::nullopt;
}

nlohmann::json record_to_json(const ExecutionRecord& r) {
  nlohmann::json elements = nlohmann::json::array();
  for (const ElementRef& e : r.elements) elements.push_back(to_string(e));
  return {{"query_hash", r.query_hash},
          {"status", status_name(r.status)},
          {"elements", std::move(elements)},
          {"fetched_at", r.fetched_at},
          {"message", r.message},
          {"count_only", r.count_only},
          {"raw", r.raw}};
}

ExecutionRecord record_from_json(const nlohmann::json& j) {
  ExecutionRecord r;
  try {
    r.query_hash = j.at("query_hash").get<std::string>();
    const auto status = status_from_name(j.at("status").get<std::string>());
    if (!status) throw ValidationError("unknown execution status");
    r.status = *status;
    for (const nlohmann::json& e : j.at("elements")) {
      const auto ref = element_ref_from_string(e.get<std::string>());
      if (!ref) throw ValidationError("malformed element reference");
      r.elements.insert(*ref);
    }
    r.fetched_at = j.value("fetched_at", "");
    r.message = j.value("message", "");
    r.count_only = j.value("count_only", false);
    r.raw = j.value("raw", "");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed execution record: ") +
                          e.what());
  }
  return r;
}

std::string query_hash(std::string_view query, std::string_view endpoint,
                       const std::optional<BBox>& bbox) {
  std::string key = ovb::text::collapse_whitespace(query);
  key += "\n";
  key += endpoint;
  key += "\n";
  key += bbox ? format_bbox(*bbox) : "-";
  return ovb::text::sha256_hex(key);
}

ParsedResponse parse_json_response(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("malformed JSON response");
  }
  ParsedResponse out;
  if (j.contains("remark") && j["remark"].is_string()) {
    const std::string remark = j["remark"].get<std::string>();
    if (remark.find("error") != std::string::npos) out.runtime_error = remark;
  }
  if (!j.contains("elements") || !j["elements"].is_array()) return out;
  bool any_count = false;
  bool all_count = true;
  for (const nlohmann::json& e : j["elements"]) {
    const std::string type =
        e.contains("type") && e["type"].is_string() ? e["type"].get<std::string>()
                                                    : "";
    const ElementKind kind = element_kind_from_name(type);
    if (kind != ElementKind::kDerived && e.contains("id") &&
        e["id"].is_number_integer()) {
      out.elements.insert({kind, e["id"].get<std::int64_t>(), ""});
      all_count = false;
      continue;
    }
    if (type == "count") {
      any_count = true;
    } else {
      all_count = false;
    }
    nlohmann::json content = e;
    content.erase("id");
    out.elements.insert(derived(content.dump()));
  }
  out.count_only = any_count && all_count;
  return out;
}

ParsedResponse parse_xml_response(std::string_view body) {
  static const std::regex kElement(
      R"re(<(node|way|relation|area)\b[^>]*?\bid\s*=\s*"(-?\d+)")re");
  static const std::regex kCount(R"(<count\b[^>]*?(/>|>[\s\S]*?</count>))");
  static const std::regex kRemark(R"(<remark>([\s\S]*?)</remark>)");
  ParsedResponse out;
  const std::string s(body);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kElement);
       it != std::sregex_iterator(); ++it) {
    out.elements.insert({element_kind_from_name((*it)[1].str()),
                         std::stoll((*it)[2].str()), ""});
  }
  bool any_count = false;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kCount);
       it != std::sregex_iterator(); ++it) {
    any_count = true;
    out.elements.insert(
        derived(ovb::text::collapse_whitespace((*it)[0].str())));
  }
  std::smatch m;
  if (std::regex_search(s, m, kRemark) &&
      m[1].str().find("error") != std::string::npos) {
    out.runtime_error = ovb::text::collapse_whitespace(m[1].str());
  }
  out.count_only = any_count && std::all_of(out.elements.begin(),
                                            out.elements.end(),
                                            [](const ElementRef& e) {
                                              return e.kind ==
                                                     ElementKind::kDerived;
                                            });
  return out;
}

ParsedResponse parse_csv_response(std::string_view body) {
  ParsedResponse out;
  std::vector<std::string> lines = split(body, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) return out;
  const char sep = lines[0].find('\t') != std::string::npos ? '\t' : ',';
  const std::vector<std::string> header = split(lines[0], sep);
  const int id_col = column(header, {"::id", "@id"});
  const int type_col = column(header, {"::type", "@type"});
  bool count_header = false;
  for (const std::string& h : header) {
    if (h.find("count") != std::string::npos) count_header = true;
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::vector<std::string> row = split(lines[i], sep);
    if (id_col >= 0 && static_cast<std::size_t>(id_col) < row.size()) {
      const auto id = to_int64(row[id_col]);
      const ElementKind kind =
          type_col >= 0 && static_cast<std::size_t>(type_col) < row.size()
              ? element_kind_from_name(row[type_col])
              : ElementKind::kDerived;
      if (id && kind != ElementKind::kDerived) {
        out.elements.insert({kind, *id, ""});
        continue;
      }
    }
    out.elements.insert(derived(lines[i]));
  }
  out.count_only = count_header && id_col < 0;
  return out;
}

ParsedResponse parse_response(std::string_view body) {
  const std::size_t first = body.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  if (body[first] == '{') return parse_json_response(body);
  if (body[first] == '<') return parse_xml_response(body);
  return parse_csv_response(body);
}

RateLimiter::RateLimiter(double min_interval_seconds)
    : interval_(std::max(0.0, min_interval_seconds)) {}

void RateLimiter::acquire() {
  std::lock_guard lock(mu_);
  if (!log_.empty()) {
    const auto earliest = std::max(
        log_.back() +
            std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                interval_),
        free_at_);
    while (std::chrono::steady_clock::now() < earliest) {
      std::this_thread::sleep_until(earliest);
    }
  }
  log_.push_back(std::chrono::steady_clock::now());
}

void RateLimiter::complete() {
  std::lock_guard lock(mu_);
  free_at_ = std::chrono::steady_clock::now() +
             std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                 interval_);
}

std::vector<std::chrono::steady_clock::time_point> RateLimiter::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

ExecCache::ExecCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_)) {
    throw IoError("cannot create cache directory " + dir_.string());
  }
}

std::optional<ExecutionRecord> ExecCache::get(const std::string& hash) const {
  const std::filesystem::path p = dir_ / (hash + ".json");
  if (!std::filesystem::exists(p)) return std::nullopt;
  try {
    return record_from_json(nlohmann::json::parse(io::read_file(p)));
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  } catch (const ValidationError&) {
    return std::nullopt;
  }
}

void ExecCache::put(const ExecutionRecord& record) const {
  io::write_file_atomic(dir_ / (record.query_hash + ".json"),
                        record_to_json(record).dump());
}

std::string ExecCache::export_archive() const {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& f : files) {
    out += nlohmann::json::parse(io::read_file(f)).dump();
    out.push_back('\n');
  }
  return out;
}

std::size_t ExecCache::import_archive(std::string_view archive) const {
  std::size_t n = 0;
  for (const nlohmann::json& row : io::parse_jsonl(archive, "cache archive")) {
    const ExecutionRecord r = record_from_json(row);
    if (r.query_hash.size() != 64 ||
        r.query_hash.find_first_not_of("0123456789abcdef") != std::string::npos) {
      throw ValidationError("cache archive row has a malformed query hash");
    }
    put(r);
    ++n;
  }
  return n;
}

std::string resolve_endpoint(std::string_view flag_value) {
  if (const char* env = std::getenv(std::string(kEndpointEnv).c_str());
      env != nullptr && *env != '\0') {
    return env;
  }
  return flag_value.empty() ? std::string(kDefaultEndpoint)
                            : std::string(flag_value);
}

OverpassClient::OverpassClient(ClientOptions options, const ExecCache* cache)
    : options_(std::move(options)),
      cache_(cache),
      limiter_(options_.min_interval_seconds) {
  http::parse_endpoint(options_.endpoint);
}

ExecutionRecord OverpassClient::execute(std::string_view query) {
  const std::string hash =
      query_hash(query, options_.endpoint, options_.bbox);
  if (cache_) {
    if (auto hit = cache_->get(hash)) return *hit;
  }
  std::string prepared;
  try {
    prepared = prepare(query, options_.bbox);
  } catch (const ValidationError& e) {
    ExecutionRecord r;
    r.query_hash = hash;
    r.status = ExecStatus::kSyntaxError;
    r.message = e.what();
    r.fetched_at = utc_now();
    return r;
  }
  ExecutionRecord r = fetch(prepared, hash);
  if (cache_ && (r.status == ExecStatus::kOk ||
                 r.status == ExecStatus::kSyntaxError)) {
    cache_->put(r);
  }
  return r;
}

ExecutionRecord OverpassClient::fetch(const std::string& prepared,
                                      const std::string& hash) {
  ExecutionRecord r;
  r.query_hash = hash;
  const http::Endpoint endpoint = http::parse_endpoint(options_.endpoint);
  const std::string body = "data=" + http::url_encode(prepared);
  std::lock_guard lock(dispatch_mu_);
  for (int attempt = 0;; ++attempt) {
    limiter_.acquire();
    ++requests_;
    const http::Response resp =
        http::post(endpoint, body, "application/x-www-form-urlencoded",
                   options_.timeout_seconds);
    limiter_.complete();
    r.fetched_at = utc_now();
    if (resp.outcome == http::Outcome::kTimeout) {
      r.status = ExecStatus::kTimeout;
      r.message = resp.error;
      return r;
    }
    if (resp.outcome != http::Outcome::kOk) {
      r.status = ExecStatus::kRemoteError;
      r.message = resp.error;
      return r;
    }
    if ((resp.status == 429 || resp.status == 504) &&
        attempt < options_.max_retries) {
      std::this_thread::sleep_for(std::chrono::duration<double>(
          options_.backoff_seconds * std::pow(2.0, attempt)));
      continue;
    }
    r.raw = resp.body;
    if (resp.status == 400) {
      r.status = ExecStatus::kSyntaxError;
      r.message = "HTTP 400";
      return r;
    }
    if (resp.status != 200) {
      r.status = ExecStatus::kRemoteError;
      r.message = "HTTP " + std::to_string(resp.status);
      return r;
    }
    try {
      ParsedResponse parsed = parse_response(resp.body);
      if (parsed.runtime_error) {
        r.message = *parsed.runtime_error;
        r.status = parsed.runtime_error->find("timed out") != std::string::npos
                       ? ExecStatus::kTimeout
                       : ExecStatus::kRemoteError;
        return r;
      }
      r.status = ExecStatus::kOk;
      r.elements = std::move(parsed.elements);
      r.count_only = parsed.count_only;
    } catch (const ValidationError& e) {
      r.status = ExecStatus::kRemoteError;
      r.message = e.what();
    }
    return r;
  }
}

Comparison compare(const ExecutionRecord& pred, const ExecutionRecord& ref) {
  Comparison c;
  if (pred.status != ExecStatus::kOk) {
    c.flag = "pred:" + std::string(status_name(pred.status));
  }
  if (ref.status != ExecStatus::kOk) {
    if (!c.flag.empty()) c.flag += ";";
    c.flag += "ref:" + std::string(status_name(ref.status));
  }
  if (!c.flag.empty()) return c;
  c.ex = metrics::ex(pred.elements, ref.elements);
  c.ex_soft = metrics::ex_soft(pred.elements, ref.elements);
  return c;
}

std::map<std::string, metrics::ExecOutcome> execute_pairs(
    std::span<const metrics::PairInput> pairs, OverpassClient& client,
    std::vector<std::string>* count_only_ids) {
  std::map<std::string, metrics::ExecOutcome> out;
  for (const metrics::PairInput& p : pairs) {
    const ExecutionRecord pred = client.execute(p.pred);
    const ExecutionRecord ref = client.execute(p.ref);
    metrics::ExecOutcome o;
    o.flag = compare(pred, ref).flag;
    if (o.flag.empty()) {
      o.pred = pred.elements;
      o.ref = ref.elements;
    }
    if (count_only_ids && ref.count_only) count_only_ids->push_back(p.id);
    out[p.id] = std::move(o);
  }
  return out;
}

}  // namespace ovb::overpass
