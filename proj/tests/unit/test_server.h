// Copyright 2026 The Restoragent Authors.
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

#ifndef RESTORAGENT_TESTS_UNIT_TEST_SERVER_H_
#define RESTORAGENT_TESTS_UNIT_TEST_SERVER_H_

#include <string>
#include <thread>

#include "httplib.h"

namespace restoragent::testing {

// An httplib server on an ephemeral localhost port, running on its own
// thread for the lifetime of the object. Register handlers on server()
// before calling Start().
class TestServer {
 public:
  TestServer() = default;
  ~TestServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Server& server() { return server_; }

  void Start() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  int port() const { return port_; }
  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace restoragent::testing

#endif  // RESTORAGENT_TESTS_UNIT_TEST_SERVER_H_
