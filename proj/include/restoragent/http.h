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

#ifndef RESTORAGENT_HTTP_H_
#define RESTORAGENT_HTTP_H_

#include <chrono>
#include <string>

#include "json.hpp"

namespace restoragent::http {

struct Endpoint {
  std::string host;
  int port = 80;
  std::string path = "/";
};

// Accepts http://host[:port][/path]. Throws kInvalidParam otherwise.
Endpoint ParseEndpoint(const std::string& uri);

// POSTs a JSON body and parses the JSON reply. Connection failures,
// timeouts and non-200 statuses throw kBackendUnavailable; an unparseable
// body throws kProtocol.
nlohmann::json PostJson(const Endpoint& endpoint, const nlohmann::json& body,
                        std::chrono::milliseconds timeout);

// GET returning the status code, or -1 when the server is unreachable.
int GetStatus(const Endpoint& endpoint, std::chrono::milliseconds timeout);

}  // namespace restoragent::http

#endif  // RESTORAGENT_HTTP_H_
