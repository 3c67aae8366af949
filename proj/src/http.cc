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


#include "ovb/http.h"

#include <chrono>
#include <cmath>
#include <thread>

#include "httplib.h"
#include "ovb/errors.h"

namespace ovb::http {

Endpoint parse_endpoint(std::string_view url) {
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw ValidationError("endpoint URL needs a scheme: " + std::string(url));
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ValidationError("unsupported endpoint scheme: " + std::string(url));
  }
  const std::size_t path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  if (path_start == std::string_view::npos) {
    e.origin = std::string(url);
    e.path = "/";
  } else {
    e.origin = std::string(url.substr(0, path_start));
    e.path = std::string(url.substr(path_start));
  }
  if (e.origin.size() <= scheme_end + 3) {
    throw ValidationError("endpoint URL has no host: " + std::string(url));
  }
  return e;
}

Response post(const Endpoint& endpoint, const std::string& body,
              std::string_view content_type, double timeout_seconds) {
  httplib::Client client(endpoint.origin);
  const auto timeout = std::chrono::microseconds(
      static_cast<std::int64_t>(std::ceil(timeout_seconds * 1e6)));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  Response out;
  auto result = client.Post(endpoint.path, body, std::string(content_type));
  if (!result) {
    const httplib::Error err = result.error();
    out.error = httplib::to_string(err);
    out.outcome = err == httplib::Error::Read || err == httplib::Error::Write ||
                          err == httplib::Error::ConnectionTimeout
                      ? Outcome::kTimeout
                      : Outcome::kConnectionFailed;
    return out;
  }
  out.outcome = Outcome::kOk;
  out.status = result->status;
  out.body = result->body;
  return out;
}

nlohmann::json post_json(const std::string& url, const nlohmann::json& body,
                         const RetryOptions& options) {
  const Endpoint endpoint = parse_endpoint(url);
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= options.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(
          options.backoff_seconds * std::pow(2.0, attempt - 1)));
    }
    const Response r =
        post(endpoint, payload, "application/json", options.timeout_seconds);
    if (r.outcome != Outcome::kOk) {
      last_error = r.error;
      continue;
    }
    if (r.status == 429 || r.status >= 500) {
      last_error = "HTTP " + std::to_string(r.status);
      continue;
    }
    if (r.status != 200) {
      throw IoError(url + " answered HTTP " + std::to_string(r.status));
    }
    try {
      return nlohmann::json::parse(r.body);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(url + " returned malformed JSON: " + e.what());
    }
  }
  throw IoError(url + " unreachable: " + last_error);
}

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 15]);
    }
  }
  return out;
}

}  // namespace ovb::http
