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


// Loopback Overpass stand-in that replays recorded responses.

#ifndef OVB_TESTS_SUPPORT_STUB_SERVER_H_
#define OVB_TESTS_SUPPORT_STUB_SERVER_H_

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace httplib {
class Server;
}

namespace ovb::testing {

struct StubReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct StubHit {
  std::chrono::steady_clock::time_point at;
  std::string query;
};

class StubServer {
 public:
  StubServer();
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  // Replies are served in order; the last one repeats.
  void on(const std::string& query, std::vector<StubReply> replies);
  void fallback(StubReply reply);

  std::string url() const;
  std::vector<StubHit> log() const;
  std::size_t hits() const;

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<StubReply>> replies_;
  std::map<std::string, std::size_t> served_;
  StubReply fallback_{404, "{}", "application/json"};
  std::vector<StubHit> log_;
};

// Generic POST endpoint for embedding, generator and refiner services.
class JsonStub {
 public:
  // Returns (status, body) for a request body.
  using Handler = std::function<std::pair<int, std::string>(const std::string&)>;
  explicit JsonStub(Handler handler);
  ~JsonStub();
  JsonStub(const JsonStub&) = delete;
  JsonStub& operator=(const JsonStub&) = delete;

  std::string url() const;
  std::size_t hits() const;

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  Handler handler_;
  mutable std::mutex mu_;
  std::size_t hits_ = 0;
};

// {"elements":[{"type":"node","id":1},...]}
std::string overpass_json(const std::vector<std::string>& refs);

}  // namespace ovb::testing

#endif  // OVB_TESTS_SUPPORT_STUB_SERVER_H_
