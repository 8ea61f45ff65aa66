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

#include "restoragent/http.h"

#include <charconv>

#include "httplib.h"
#include "restoragent/error.h"

namespace restoragent::http {
namespace {

httplib::Client MakeClient(const Endpoint& e, std::chrono::milliseconds timeout) {
  httplib::Client client(e.host, e.port);
  const auto sec = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usec =
      std::chrono::duration_cast<std::chrono::microseconds>(timeout - sec);
  client.set_connection_timeout(sec.count(), usec.count());
  client.set_read_timeout(sec.count(), usec.count());
  client.set_write_timeout(sec.count(), usec.count());
  return client;
}

std::string Describe(const Endpoint& e) {
  return e.host + ":" + std::to_string(e.port) + e.path;
}

}  // namespace

Endpoint ParseEndpoint(const std::string& uri) {
  constexpr std::string_view kScheme = "http://";
  if (uri.rfind(kScheme, 0) != 0) {
    throw Error(ErrorCode::kInvalidParam, "endpoint must start with http://: " + uri);
  }
  std::string rest = uri.substr(kScheme.size());
  Endpoint e;
  const auto slash = rest.find('/');
  if (slash != std::string::npos) {
    e.path = rest.substr(slash);
    rest.resize(slash);
  }
  const auto colon = rest.rfind(':');
  if (colon != std::string::npos) {
    const std::string port = rest.substr(colon + 1);
    int value = 0;
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc() || ptr != port.data() + port.size() || value <= 0 ||
        value > 65535) {
      throw Error(ErrorCode::kInvalidParam, "bad port in endpoint: " + uri);
    }
    e.port = value;
    rest.resize(colon);
  }
  if (rest.empty()) throw Error(ErrorCode::kInvalidParam, "missing host: " + uri);
  e.host = rest;
  return e;
}

nlohmann::json PostJson(const Endpoint& endpoint, const nlohmann::json& body,
                        std::chrono::milliseconds timeout) {
  httplib::Client client = MakeClient(endpoint, timeout);
  auto res = client.Post(endpoint.path, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kBackendUnavailable,
                Describe(endpoint) + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kBackendUnavailable,
                Describe(endpoint) + ": HTTP " + std::to_string(res->status));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProtocol, Describe(endpoint) + ": " + e.what());
  }
}

int GetStatus(const Endpoint& endpoint, std::chrono::milliseconds timeout) {
  httplib::Client client = MakeClient(endpoint, timeout);
  auto res = client.Get(endpoint.path);
  return res ? res->status : -1;
}

}  // namespace restoragent::http
