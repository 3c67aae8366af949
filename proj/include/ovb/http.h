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


// Thin blocking HTTP client shared by the remote providers and the Overpass
// client.

#ifndef OVB_HTTP_H_
#define OVB_HTTP_H_

#include <string>
#include <string_view>

#include "json.hpp"

namespace ovb::http {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

// Throws ValidationError on anything but http:// or https:// URLs.
Endpoint parse_endpoint(std::string_view url);

enum class Outcome { kOk, kTimeout, kConnectionFailed };

struct Response {
  Outcome outcome = Outcome::kConnectionFailed;
  int status = 0;
  std::string body;
  std::string error;
};

Response post(const Endpoint& endpoint, const std::string& body,
              std::string_view content_type, double timeout_seconds);

struct RetryOptions {
  double timeout_seconds = 30;
  int retries = 2;
  double backoff_seconds = 0.5;
};

// POSTs a JSON body and parses a JSON reply, retrying transport failures and
// 429/5xx replies. Throws IoError when every attempt fails.
nlohmann::json post_json(const std::string& url, const nlohmann::json& body,
                         const RetryOptions& options);

std::string url_encode(std::string_view s);

}  // namespace ovb::http

#endif  // OVB_HTTP_H_
