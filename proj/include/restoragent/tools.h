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

#ifndef RESTORAGENT_TOOLS_H_
#define RESTORAGENT_TOOLS_H_

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "restoragent/http.h"
#include "restoragent/image.h"
#include "restoragent/types.h"

namespace restoragent::tools {

using ToolFn = std::function<ImageBuf(const ImageBuf&)>;

inline constexpr std::chrono::milliseconds kDefaultExternalTimeout{30000};

struct DcpParams {
  int patch = 15;
  double omega = 0.95;
  double t_floor = 0.1;
  double top_fraction = 0.001;
};

// Dark-channel-prior dehazing. Atmospheric light is the per-channel mean of
// the input over the brightest top_fraction of dark-channel pixels.
ImageBuf DcpDehaze(const ImageBuf& img, const DcpParams& params = {});

// Contrast-limited adaptive histogram equalization on BT.601 luma; chroma
// offsets are preserved by adding the luma change to every channel.
ImageBuf ClaheLlie(const ImageBuf& img, int tiles = 8, double clip_limit = 2.0);

// v -> v^(1/gamma).
ImageBuf GammaLlie(const ImageBuf& img, double gamma = 2.2);

// Joint bilateral filter; range distance is Euclidean over RGB.
ImageBuf BilateralDenoise(const ImageBuf& img, int radius = 2, double sigma_s = 2.0,
                          double sigma_r = 0.1);

// Per-channel medians over a 1x5 (rows x cols) and a 3x3 window.
ImageBuf MedianDerain(const ImageBuf& img);
ImageBuf MedianDesnow(const ImageBuf& img);

ImageBuf UnsharpDeblur(const ImageBuf& img, double sigma = 1.5, double amount = 0.8);

// GammaLlie followed by DcpDehaze.
ImageBuf CompositeEnhance(const ImageBuf& img);

// Names accepted by MakeBuiltin: the default registry ids plus "identity".
const std::vector<std::string>& BuiltinNames();

// Numeric params override the builtin's defaults (dcp_dehaze: patch, omega,
// t_floor; gamma_llie: gamma; clahe_llie: tiles, clip_limit; bilateral_denoise:
// sigma_s, sigma_r; unsharp_deblur: sigma, amount). Throws kConfig on an
// unknown builtin, kInvalidParam on an unknown or malformed param.
ToolFn MakeBuiltin(const std::string& name,
                   const std::map<std::string, std::string>& params);

// Wire protocol request for one image. Throws kBackendUnavailable on
// transport failure, kProtocol on a malformed reply and kShapeViolation when
// the returned image differs in size from the input.
ImageBuf CallExternal(const http::Endpoint& endpoint, RestorationTask task,
                      const ImageBuf& img,
                      const std::map<std::string, std::string>& params,
                      std::chrono::milliseconds timeout = kDefaultExternalTimeout);

nlohmann::json MakeToolRequest(RestorationTask task, const ImageBuf& img,
                               const std::map<std::string, std::string>& params);

// Immutable once built. Descriptors are kept ordered by tool_id.
class ToolRegistry {
 public:
  struct Options {
    std::chrono::milliseconds external_timeout = kDefaultExternalTimeout;
    int max_concurrent_external = 4;
  };

  ToolRegistry();
  explicit ToolRegistry(Options options);
  ~ToolRegistry();
  ToolRegistry(ToolRegistry&&) noexcept;
  ToolRegistry& operator=(ToolRegistry&&) noexcept;

  // Builtins are resolved from params["builtin"], defaulting to tool_id.
  // Throws kConfig on a duplicate id or an unresolvable builtin.
  void Add(ToolDescriptor descriptor);
  void Add(ToolDescriptor descriptor, ToolFn fn);

  bool contains(const std::string& tool_id) const;
  const ToolDescriptor& descriptor(const std::string& tool_id) const;
  std::vector<ToolDescriptor> descriptors() const;

  // Runs the tool for `task`. Throws kUnknownTool, kToolFailure for external
  // transport or protocol failures, kShapeViolation on a size change.
  ImageBuf Invoke(const std::string& tool_id, const ImageBuf& img,
                  RestorationTask task) const;

 private:
  struct Entry;
  struct Limiter;
  Options options_;
  std::map<std::string, Entry> entries_;
  std::unique_ptr<Limiter> limiter_;
};

// Covers every RestorationTask with builtins.
ToolRegistry DefaultRegistry();

// {"external_timeout_ms": int?, "max_concurrent_external": int?,
//  "tools": [{"tool_id", "tasks": [name...], "mode": "builtin"|"external",
//             "endpoint"?, "params"?: {key: string|number}}]}
// Throws kConfig on schema errors.
ToolRegistry RegistryFromJson(const nlohmann::json& config);

}  // namespace restoragent::tools

#endif  // RESTORAGENT_TOOLS_H_
