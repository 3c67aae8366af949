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


// Executes queries against an Overpass API endpoint for execution-based
// scoring: placeholder substitution, a single rate-limited dispatch queue,
// an on-disk record cache and JSON/XML/CSV response parsing.

#ifndef OVB_OVERPASS_CLIENT_H_
#define OVB_OVERPASS_CLIENT_H_

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ovb/element_ref.h"
#include "ovb/metrics.h"

namespace ovb::overpass {

inline constexpr std::string_view kDefaultEndpoint =
    "https://overpass-api.de/api/interpreter";
inline constexpr std::string_view kEndpointEnv = "OVERPASS_URL";

struct BBox {
  double south = 0;
  double west = 0;
  double north = 0;
  double east = 0;
};

// Central Zurich; used when a run gives no bbox.
inline constexpr BBox kDefaultBBox{47.36, 8.52, 47.39, 8.56};

// "s,w,n,e". Throws ValidationError on malformed or out-of-range input.
BBox parse_bbox(std::string_view text);
// "47.0,8.0,47.1,8.1": shortest round-trip digits, always with a fraction.
std::string format_bbox(const BBox& bbox);

// Substitutes {{bbox}}. Throws MissingBBox when the query needs a bbox and
// none is given, UnsupportedPlaceholder for any other placeholder.
std::string prepare(std::string_view query, const std::optional<BBox>& bbox);

enum class ExecStatus { kOk, kTimeout, kSyntaxError, kRemoteError };

std::string_view status_name(ExecStatus status);
std::optional<ExecStatus> status_from_name(std::string_view name);

struct ExecutionRecord {
  std::string query_hash;
  ExecStatus status = ExecStatus::kRemoteError;
  ElementSet elements;  // empty unless status is ok
  std::string fetched_at;
  std::string raw;      // response payload
  std::string message;
  bool count_only = false;  // every row is a count row
};

nlohmann::json record_to_json(const ExecutionRecord& record);
ExecutionRecord record_from_json(const nlohmann::json& j);

// SHA-256 over the whitespace-collapsed query, the endpoint and the bbox
// text.
std::string query_hash(std::string_view query, std::string_view endpoint,
                       const std::optional<BBox>& bbox);

struct ParsedResponse {
  ElementSet elements;
  bool count_only = false;
  std::optional<std::string> runtime_error;  // from an Overpass remark
};

// Format is sniffed from the first non-blank byte: '{' JSON, '<' XML,
// anything else CSV. Unknown element kinds map to derived refs.
ParsedResponse parse_response(std::string_view body);
ParsedResponse parse_json_response(std::string_view body);
ParsedResponse parse_xml_response(std::string_view body);
ParsedResponse parse_csv_response(std::string_view body);

// Enforces a minimum spacing between dispatches and keeps the dispatch log.
class RateLimiter {
 public:
  explicit RateLimiter(double min_interval_seconds);
  void acquire();
  // Marks the end of a request; the next dispatch also waits one interval
  // from this point.
  void complete();
  std::vector<std::chrono::steady_clock::time_point> log() const;
  double min_interval_seconds() const { return interval_.count(); }

 private:
  std::chrono::duration<double> interval_;
  mutable std::mutex mu_;
  std::vector<std::chrono::steady_clock::time_point> log_;
  std::chrono::steady_clock::time_point free_at_{};
};

// One <hash>.json file per record, written atomically. Reads may run
// concurrently.
class ExecCache {
 public:
  explicit ExecCache(std::filesystem::path dir);
  std::optional<ExecutionRecord> get(const std::string& hash) const;
  void put(const ExecutionRecord& record) const;
  const std::filesystem::path& dir() const { return dir_; }

  // JSON lines, one record per line, sorted by hash.
  std::string export_archive() const;
  // Returns the number of records written.
  std::size_t import_archive(std::string_view archive) const;

 private:
  std::filesystem::path dir_;
};

struct ClientOptions {
  std::string endpoint = std::string(kDefaultEndpoint);
  std::optional<BBox> bbox = kDefaultBBox;
  double min_interval_seconds = 1.0;
  double timeout_seconds = 240;
  int max_retries = 3;
  double backoff_seconds = 1.0;
};

// Endpoint precedence: OVERPASS_URL, then the given value.
std::string resolve_endpoint(std::string_view flag_value);

class OverpassClient {
 public:
  // cache may be null.
  OverpassClient(ClientOptions options, const ExecCache* cache);

  // Never throws for remote failures; they are captured in the record.
  ExecutionRecord execute(std::string_view query);

  const RateLimiter& limiter() const { return limiter_; }
  std::size_t network_requests() const { return requests_; }
  const ClientOptions& options() const { return options_; }

 private:
  ExecutionRecord fetch(const std::string& prepared, const std::string& hash);

  ClientOptions options_;
  const ExecCache* cache_;
  RateLimiter limiter_;
  std::mutex dispatch_mu_;
  std::size_t requests_ = 0;
};

struct Comparison {
  double ex = 0;
  double ex_soft = 0;
  std::string flag;  // empty when both records are ok
};

Comparison compare(const ExecutionRecord& pred, const ExecutionRecord& ref);

// Executes both sides of every pair and packages the outcomes for
// metrics::evaluate_batch. Failed executions carry a flag.
std::map<std::string, metrics::ExecOutcome> execute_pairs(
    std::span<const metrics::PairInput> pairs, OverpassClient& client,
    std::vector<std::string>* count_only_ids = nullptr);

}  // namespace ovb::overpass

#endif  // OVB_OVERPASS_CLIENT_H_
