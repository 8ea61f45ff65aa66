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

#include "restoragent/tools.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <numeric>

#include "restoragent/base64.h"
#include "restoragent/error.h"
#include "restoragent/filters.h"

namespace restoragent::tools {
namespace {

Plane ChannelPlane(const ImageBuf& img, int c) {
  const auto p = img.plane(c);
  return Plane(img.width(), img.height(), std::vector<double>(p.begin(), p.end()));
}

ImageBuf FromPlanes(const Plane& r, const Plane& g, const Plane& b) {
  std::vector<double> data;
  data.reserve(r.values.size() * 3);
  for (const Plane* p : {&r, &g, &b}) data.insert(data.end(), p->values.begin(), p->values.end());
  return ClampedImage(r.width, r.height, std::move(data));
}

template <typename F>
ImageBuf PerChannel(const ImageBuf& img, F&& f) {
  return FromPlanes(f(ChannelPlane(img, 0)), f(ChannelPlane(img, 1)),
                    f(ChannelPlane(img, 2)));
}

Plane MinChannel(const ImageBuf& img, const double (&scale)[3]) {
  Plane out(img.width(), img.height(), 0.0);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    out.values[i] = std::min({img.plane(0)[i] / scale[0], img.plane(1)[i] / scale[1],
                              img.plane(2)[i] / scale[2]});
  }
  return out;
}

double ParseNumber(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kInvalidParam, "param " + key + " is not a number: " + text);
  }
  return v;
}

// Reads the listed numeric keys; any other key except "builtin" is rejected.
std::map<std::string, double> NumericParams(
    const std::string& name, const std::map<std::string, std::string>& params,
    std::initializer_list<std::string_view> allowed) {
  std::map<std::string, double> out;
  for (const auto& [key, value] : params) {
    if (key == "builtin") continue;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::kInvalidParam, "builtin " + name + " has no param " + key);
    }
    out[key] = ParseNumber(key, value);
  }
  return out;
}

double Get(const std::map<std::string, double>& m, const std::string& key, double fallback) {
  const auto it = m.find(key);
  return it == m.end() ? fallback : it->second;
}

}  // namespace

ImageBuf DcpDehaze(const ImageBuf& img, const DcpParams& params) {
  if (params.omega <= 0.0 || params.omega > 1.0 || params.t_floor <= 0.0 ||
      params.t_floor > 1.0 || params.top_fraction <= 0.0 || params.top_fraction > 1.0) {
    throw Error(ErrorCode::kInvalidParam, "dcp_dehaze parameters out of range");
  }
  const double unit[3] = {1.0, 1.0, 1.0};
  const Plane dark = MinFilter(MinChannel(img, unit), params.patch);

  const std::size_t n = img.pixel_count();
  const std::size_t count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(params.top_fraction * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + count, order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (dark.values[a] != dark.values[b]) return dark.values[a] > dark.values[b];
                      return a < b;
                    });
  double airlight[3] = {0.0, 0.0, 0.0};
  for (int c = 0; c < 3; ++c) {
    for (std::size_t k = 0; k < count; ++k) airlight[c] += img.plane(c)[order[k]];
    airlight[c] = std::max(airlight[c] / static_cast<double>(count), 1e-6);
  }

  const Plane dark_norm = MinFilter(MinChannel(img, airlight), params.patch);
  std::vector<double> out(n * 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = std::max(1.0 - params.omega * dark_norm.values[i], params.t_floor);
    for (int c = 0; c < 3; ++c) {
      out[c * n + i] = (img.plane(c)[i] - airlight[c]) / t + airlight[c];
    }
  }
  return ClampedImage(img.width(), img.height(), std::move(out));
}

ImageBuf ClaheLlie(const ImageBuf& img, int tiles, double clip_limit) {
  if (tiles < 1 || clip_limit <= 0.0) {
    throw Error(ErrorCode::kInvalidParam, "clahe_llie needs tiles >= 1 and clip_limit > 0");
  }
  constexpr int kBins = 256;
  const int w = img.width(), h = img.height();
  const int tx = std::min(tiles, w), ty = std::min(tiles, h);
  const std::vector<double> luma = Luma(img);
  std::vector<int> bin(luma.size());
  for (std::size_t i = 0; i < luma.size(); ++i) bin[i] = QuantizeSample(luma[i]);

  // lut[(j * tx + i) * kBins + b]: equalized value of bin b in tile (j, i).
  std::vector<double> lut(static_cast<std::size_t>(tx) * ty * kBins);
  for (int j = 0; j < ty; ++j) {
    const int y0 = j * h / ty, y1 = (j + 1) * h / ty;
    for (int i = 0; i < tx; ++i) {
      const int x0 = i * w / tx, x1 = (i + 1) * w / tx;
      std::vector<double> hist(kBins, 0.0);
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) hist[bin[static_cast<std::size_t>(y) * w + x]] += 1.0;
      }
      const double area = static_cast<double>((y1 - y0) * (x1 - x0));
      const double limit = std::max(1.0, clip_limit * area / kBins);
      double excess = 0.0;
      for (double& v : hist) {
        if (v > limit) {
          excess += v - limit;
          v = limit;
        }
      }
      double cdf = 0.0;
      double* dst = &lut[(static_cast<std::size_t>(j) * tx + i) * kBins];
      for (int b = 0; b < kBins; ++b) {
        cdf += hist[b] + excess / kBins;
        dst[b] = cdf / area;
      }
    }
  }

  auto locate = [](int p, int size, int n, int& lo, int& hi, double& frac) {
    const double f = std::clamp((p + 0.5) * n / size - 0.5, 0.0, n - 1.0);
    lo = static_cast<int>(std::floor(f));
    hi = std::min(lo + 1, n - 1);
    frac = f - lo;
  };
  const std::size_t n = img.pixel_count();
  std::vector<double> out(n * 3);
  for (int y = 0; y < h; ++y) {
    int j0, j1;
    double fy;
    locate(y, h, ty, j0, j1, fy);
    for (int x = 0; x < w; ++x) {
      int i0, i1;
      double fx;
      locate(x, w, tx, i0, i1, fx);
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      auto at = [&](int j, int i) {
        return lut[(static_cast<std::size_t>(j) * tx + i) * kBins + bin[p]];
      };
      const double mapped = (1 - fy) * ((1 - fx) * at(j0, i0) + fx * at(j0, i1)) +
                            fy * ((1 - fx) * at(j1, i0) + fx * at(j1, i1));
      const double delta = mapped - luma[p];
      for (int c = 0; c < 3; ++c) out[c * n + p] = img.plane(c)[p] + delta;
    }
  }
  return ClampedImage(w, h, std::move(out));
}

ImageBuf GammaLlie(const ImageBuf& img, double gamma) {
  if (gamma <= 0.0) throw Error(ErrorCode::kInvalidParam, "gamma must be positive");
  std::vector<double> out(img.data().begin(), img.data().end());
  for (double& v : out) v = std::pow(v, 1.0 / gamma);
  return ClampedImage(img.width(), img.height(), std::move(out));
}

ImageBuf BilateralDenoise(const ImageBuf& img, int radius, double sigma_s, double sigma_r) {
  if (radius < 0 || sigma_s <= 0.0 || sigma_r <= 0.0) {
    throw Error(ErrorCode::kInvalidParam, "bilateral parameters out of range");
  }
  const int w = img.width(), h = img.height();
  const std::size_t n = img.pixel_count();
  const double inv_s = 1.0 / (2 * sigma_s * sigma_s), inv_r = 1.0 / (2 * sigma_r * sigma_r);
  std::vector<double> out(n * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      double acc[3] = {0, 0, 0}, total = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        for (int dx = -radius; dx <= radius; ++dx) {
          const int xx = std::clamp(x + dx, 0, w - 1);
          const std::size_t q = static_cast<std::size_t>(yy) * w + xx;
          double d2 = 0.0;
          for (int c = 0; c < 3; ++c) {
            const double d = img.plane(c)[q] - img.plane(c)[p];
            d2 += d * d;
          }
          const double wgt = std::exp(-(dx * dx + dy * dy) * inv_s - d2 * inv_r);
          for (int c = 0; c < 3; ++c) acc[c] += wgt * img.plane(c)[q];
          total += wgt;
        }
      }
      for (int c = 0; c < 3; ++c) out[c * n + p] = acc[c] / total;
    }
  }
  return ClampedImage(w, h, std::move(out));
}

ImageBuf MedianDerain(const ImageBuf& img) {
  return PerChannel(img, [](const Plane& p) { return MedianFilter(p, 0, 2); });
}

ImageBuf MedianDesnow(const ImageBuf& img) {
  return PerChannel(img, [](const Plane& p) { return MedianFilter(p, 1, 1); });
}

ImageBuf UnsharpDeblur(const ImageBuf& img, double sigma, double amount) {
  if (sigma <= 0.0) throw Error(ErrorCode::kInvalidParam, "unsharp sigma must be positive");
  const auto kernel = GaussianKernel(sigma, static_cast<int>(std::ceil(3 * sigma)));
  return PerChannel(img, [&](const Plane& p) {
    Plane blurred = SeparableConvolve(p, kernel);
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      blurred.values[i] = p.values[i] + amount * (p.values[i] - blurred.values[i]);
    }
    return blurred;
  });
}

ImageBuf CompositeEnhance(const ImageBuf& img) { return DcpDehaze(GammaLlie(img)); }

const std::vector<std::string>& BuiltinNames() {
  static const std::vector<std::string> kNames = {
      "bilateral_denoise", "clahe_llie",   "composite_enhance", "dcp_dehaze", "gamma_llie",
      "identity",          "median_derain", "median_desnow",    "unsharp_deblur"};
  return kNames;
}

ToolFn MakeBuiltin(const std::string& name,
                   const std::map<std::string, std::string>& params) {
  if (name == "identity") {
    NumericParams(name, params, {});
    return [](const ImageBuf& img) { return img; };
  }
  if (name == "dcp_dehaze") {
    const auto p = NumericParams(name, params, {"patch", "omega", "t_floor"});
    DcpParams dcp;
    dcp.patch = static_cast<int>(Get(p, "patch", dcp.patch));
    dcp.omega = Get(p, "omega", dcp.omega);
    dcp.t_floor = Get(p, "t_floor", dcp.t_floor);
    return [dcp](const ImageBuf& img) { return DcpDehaze(img, dcp); };
  }
  if (name == "clahe_llie") {
    const auto p = NumericParams(name, params, {"tiles", "clip_limit"});
    const int tiles = static_cast<int>(Get(p, "tiles", 8));
    const double clip = Get(p, "clip_limit", 2.0);
    return [=](const ImageBuf& img) { return ClaheLlie(img, tiles, clip); };
  }
  if (name == "gamma_llie") {
    const double gamma = Get(NumericParams(name, params, {"gamma"}), "gamma", 2.2);
    return [=](const ImageBuf& img) { return GammaLlie(img, gamma); };
  }
  if (name == "bilateral_denoise") {
    const auto p = NumericParams(name, params, {"sigma_s", "sigma_r"});
    const double ss = Get(p, "sigma_s", 2.0), sr = Get(p, "sigma_r", 0.1);
    return [=](const ImageBuf& img) { return BilateralDenoise(img, 2, ss, sr); };
  }
  if (name == "median_derain") {
    NumericParams(name, params, {});
    return MedianDerain;
  }
  if (name == "median_desnow") {
    NumericParams(name, params, {});
    return MedianDesnow;
  }
  if (name == "unsharp_deblur") {
    const auto p = NumericParams(name, params, {"sigma", "amount"});
    const double sigma = Get(p, "sigma", 1.5), amount = Get(p, "amount", 0.8);
    return [=](const ImageBuf& img) { return UnsharpDeblur(img, sigma, amount); };
  }
  if (name == "composite_enhance") {
    NumericParams(name, params, {});
    return CompositeEnhance;
  }
  throw Error(ErrorCode::kConfig, "unknown builtin tool: " + name);
}

nlohmann::json MakeToolRequest(RestorationTask task, const ImageBuf& img,
                               const std::map<std::string, std::string>& params) {
  return {{"task", TaskName(task)},
          {"image_png_b64", Base64Encode(EncodePng(img))},
          {"params", params}};
}

ImageBuf CallExternal(const http::Endpoint& endpoint, RestorationTask task,
                      const ImageBuf& img,
                      const std::map<std::string, std::string>& params,
                      std::chrono::milliseconds timeout) {
  const nlohmann::json reply =
      http::PostJson(endpoint, MakeToolRequest(task, img, params), timeout);
  if (!reply.is_object() || !reply.contains("image_png_b64") ||
      !reply["image_png_b64"].is_string()) {
    throw Error(ErrorCode::kProtocol, "tool reply lacks image_png_b64");
  }
  if (reply.contains("tool_id") && !reply["tool_id"].is_string()) {
    throw Error(ErrorCode::kProtocol, "tool reply has non-string tool_id");
  }
  ImageBuf out = [&] {
    const auto bytes = Base64Decode(reply["image_png_b64"].get<std::string>());
    try {
      return DecodePng(bytes);
    } catch (const Error& e) {
      throw Error(ErrorCode::kProtocol, std::string("tool reply image: ") + e.message());
    }
  }();
  if (!out.same_shape(img)) {
    throw Error(ErrorCode::kShapeViolation,
                "tool returned " + std::to_string(out.width()) + "x" +
                    std::to_string(out.height()) + " for a " + std::to_string(img.width()) +
                    "x" + std::to_string(img.height()) + " input");
  }
  return out;
}

struct ToolRegistry::Entry {
  ToolDescriptor descriptor;
  ToolFn fn;  // empty for external tools
  http::Endpoint endpoint;
};

// Bounds the number of external calls in flight.
struct ToolRegistry::Limiter {
  explicit Limiter(int n) : available(n) {}
  void Acquire() {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return available > 0; });
    --available;
  }
  void Release() {
    {
      std::lock_guard lock(mu);
      ++available;
    }
    cv.notify_one();
  }
  std::mutex mu;
  std::condition_variable cv;
  int available;
};

ToolRegistry::ToolRegistry() : ToolRegistry(Options{}) {}

ToolRegistry::ToolRegistry(Options options)
    : options_(options),
      limiter_(std::make_unique<Limiter>(std::max(1, options.max_concurrent_external))) {}

ToolRegistry::~ToolRegistry() = default;
ToolRegistry::ToolRegistry(ToolRegistry&&) noexcept = default;
ToolRegistry& ToolRegistry::operator=(ToolRegistry&&) noexcept = default;

void ToolRegistry::Add(ToolDescriptor descriptor) {
  if (descriptor.mode == ToolMode::kBuiltin) {
    const auto it = descriptor.params.find("builtin");
    const std::string name = it == descriptor.params.end() ? descriptor.tool_id : it->second;
    ToolFn fn = MakeBuiltin(name, descriptor.params);
    Add(std::move(descriptor), std::move(fn));
    return;
  }
  try {
    ValidateDescriptor(descriptor);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.message());
  }
  if (entries_.count(descriptor.tool_id)) {
    throw Error(ErrorCode::kConfig, "duplicate tool_id: " + descriptor.tool_id);
  }
  http::Endpoint endpoint = http::ParseEndpoint(*descriptor.endpoint);
  const std::string id = descriptor.tool_id;
  entries_.emplace(id, Entry{std::move(descriptor), nullptr, std::move(endpoint)});
}

void ToolRegistry::Add(ToolDescriptor descriptor, ToolFn fn) {
  try {
    ValidateDescriptor(descriptor);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.message());
  }
  if (entries_.count(descriptor.tool_id)) {
    throw Error(ErrorCode::kConfig, "duplicate tool_id: " + descriptor.tool_id);
  }
  const std::string id = descriptor.tool_id;
  entries_.emplace(id, Entry{std::move(descriptor), std::move(fn), {}});
}

bool ToolRegistry::contains(const std::string& tool_id) const {
  return entries_.count(tool_id) > 0;
}

const ToolDescriptor& ToolRegistry::descriptor(const std::string& tool_id) const {
  const auto it = entries_.find(tool_id);
  if (it == entries_.end()) throw Error(ErrorCode::kUnknownTool, tool_id);
  return it->second.descriptor;
}

std::vector<ToolDescriptor> ToolRegistry::descriptors() const {
  std::vector<ToolDescriptor> out;
  out.reserve(entries_.size());
  for (const auto& [id, entry] : entries_) out.push_back(entry.descriptor);
  return out;
}

ImageBuf ToolRegistry::Invoke(const std::string& tool_id, const ImageBuf& img,
                              RestorationTask task) const {
  const auto it = entries_.find(tool_id);
  if (it == entries_.end()) throw Error(ErrorCode::kUnknownTool, tool_id);
  const Entry& entry = it->second;
  if (entry.fn) {
    ImageBuf out = entry.fn(img);
    if (!out.same_shape(img)) {
      throw Error(ErrorCode::kShapeViolation, "builtin " + tool_id + " changed the image size");
    }
    return out;
  }
  limiter_->Acquire();
  struct Release {
    Limiter* l;
    ~Release() { l->Release(); }
  } release{limiter_.get()};
  try {
    return CallExternal(entry.endpoint, task, img, entry.descriptor.params,
                        options_.external_timeout);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kBackendUnavailable || e.code() == ErrorCode::kProtocol) {
      throw Error(ErrorCode::kToolFailure, tool_id + ": " + e.message());
    }
    throw;
  }
}

ToolRegistry DefaultRegistry() {
  using T = RestorationTask;
  const std::vector<std::pair<std::string, std::set<T>>> tools = {
      {"bilateral_denoise", {T::kDenoise}},
      {"clahe_llie", {T::kLowLightEnhance}},
      {"composite_enhance", {T::kCompositeEnhance}},
      {"dcp_dehaze", {T::kDehaze}},
      {"gamma_llie", {T::kLowLightEnhance}},
      {"median_derain", {T::kDerain}},
      {"median_desnow", {T::kDesnow}},
      {"unsharp_deblur", {T::kDeblur}},
  };
  ToolRegistry registry;
  for (const auto& [id, tasks] : tools) {
    registry.Add(ToolDescriptor{id, tasks, ToolMode::kBuiltin, std::nullopt, {}});
  }
  return registry;
}

ToolRegistry RegistryFromJson(const nlohmann::json& config) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfig, msg); };
  if (!config.is_object()) fail("registry config must be an object");
  ToolRegistry::Options options;
  if (config.contains("external_timeout_ms")) {
    const auto& v = config["external_timeout_ms"];
    if (!v.is_number_integer() || v.get<long long>() <= 0) fail("external_timeout_ms must be > 0");
    options.external_timeout = std::chrono::milliseconds(v.get<long long>());
  }
  if (config.contains("max_concurrent_external")) {
    const auto& v = config["max_concurrent_external"];
    if (!v.is_number_integer() || v.get<int>() < 1) fail("max_concurrent_external must be >= 1");
    options.max_concurrent_external = v.get<int>();
  }
  if (!config.contains("tools") || !config["tools"].is_array()) fail("tools must be an array");
  ToolRegistry registry(options);
  for (const auto& t : config["tools"]) {
    if (!t.is_object() || !t.contains("tool_id") || !t["tool_id"].is_string()) {
      fail("every tool needs a string tool_id");
    }
    ToolDescriptor d;
    d.tool_id = t["tool_id"].get<std::string>();
    if (!t.contains("tasks") || !t["tasks"].is_array()) fail(d.tool_id + ": tasks must be an array");
    for (const auto& name : t["tasks"]) {
      if (!name.is_string()) fail(d.tool_id + ": task names must be strings");
      try {
        d.supported_tasks.insert(TaskFromName(name.get<std::string>()));
      } catch (const Error& e) {
        fail(d.tool_id + ": " + e.message());
      }
    }
    const std::string mode = t.value("mode", std::string("builtin"));
    if (mode == "builtin") {
      d.mode = ToolMode::kBuiltin;
    } else if (mode == "external") {
      d.mode = ToolMode::kExternal;
    } else {
      fail(d.tool_id + ": mode must be builtin or external");
    }
    if (t.contains("endpoint")) {
      if (!t["endpoint"].is_string()) fail(d.tool_id + ": endpoint must be a string");
      d.endpoint = t["endpoint"].get<std::string>();
    }
    if (t.contains("params")) {
      if (!t["params"].is_object()) fail(d.tool_id + ": params must be an object");
      for (const auto& [key, value] : t["params"].items()) {
        if (value.is_string()) {
          d.params[key] = value.get<std::string>();
        } else if (value.is_number()) {
          d.params[key] = value.dump();
        } else {
          fail(d.tool_id + ": param " + key + " must be a string or number");
        }
      }
    }
    try {
      registry.Add(std::move(d));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw;
      throw Error(ErrorCode::kConfig, e.message());
    }
  }
  return registry;
}

}  // namespace restoragent::tools
