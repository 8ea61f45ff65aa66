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

#include "restoragent/eval.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "restoragent/error.h"
#include "restoragent/filters.h"
#include "restoragent/rng.h"

namespace restoragent::eval {
namespace {

constexpr int kSsimRadius = 5;
constexpr double kSsimSigma = 1.5;
constexpr double kC1 = (0.01 * 1.0) * (0.01 * 1.0);
constexpr double kC2 = (0.03 * 1.0) * (0.03 * 1.0);

void RequireSameShape(const ImageBuf& x, const ImageBuf& y) {
  if (!x.same_shape(y)) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(x.width()) + "x" + std::to_string(x.height()) +
                    " vs " + std::to_string(y.width()) + "x" +
                    std::to_string(y.height()));
  }
}

// Separable filtering restricted to window centers whose full support lies
// inside the image; output is (h - 2r) x (w - 2r).
Plane ValidFilter(const Plane& in, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size() / 2);
  const int ow = in.width - 2 * r;
  const int oh = in.height - 2 * r;
  Plane rows(ow, in.height, 0.0);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < static_cast<int>(k.size()); ++i) acc += k[i] * in(y, x + i);
      rows(y, x) = acc;
    }
  }
  Plane out(ow, oh, 0.0);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < static_cast<int>(k.size()); ++i) acc += k[i] * rows(y + i, x);
      out(y, x) = acc;
    }
  }
  return out;
}

Plane Product(const Plane& a, const Plane& b) {
  Plane out(a.width, a.height, 0.0);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    out.values[i] = a.values[i] * b.values[i];
  }
  return out;
}

struct Planes {
  int width, height;
  std::vector<Plane> c;  // three channels

  explicit Planes(const ImageBuf& img) : width(img.width()), height(img.height()) {
    for (int ch = 0; ch < ImageBuf::kChannels; ++ch) {
      auto p = img.plane(ch);
      c.emplace_back(width, height, std::vector<double>(p.begin(), p.end()));
    }
  }

  ImageBuf ToImage() const {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(width) * height * 3);
    for (const Plane& p : c) data.insert(data.end(), p.values.begin(), p.values.end());
    return ClampedImage(width, height, std::move(data));
  }
};

void ApplyStep(Planes& img, const GammaDark& s, Rng&) {
  for (Plane& p : img.c) {
    for (double& v : p.values) v = std::pow(v, s.gamma);
  }
}

void ApplyStep(Planes& img, const Haze& s, Rng&) {
  for (Plane& p : img.c) {
    for (double& v : p.values) {
      v = s.transmission * v + (1.0 - s.transmission) * s.airlight;
    }
  }
}

void ApplyStep(Planes& img, const GaussianNoise& s, Rng& rng) {
  for (Plane& p : img.c) {
    for (double& v : p.values) v = std::clamp(v + s.sigma * rng.Normal(), 0.0, 1.0);
  }
}

double Bilinear(const Plane& p, double y, double x) {
  const int y0 = static_cast<int>(std::floor(y));
  const int x0 = static_cast<int>(std::floor(x));
  const double fy = y - y0, fx = x - x0;
  return (1 - fy) * ((1 - fx) * p.clamped(y0, x0) + fx * p.clamped(y0, x0 + 1)) +
         fy * ((1 - fx) * p.clamped(y0 + 1, x0) + fx * p.clamped(y0 + 1, x0 + 1));
}

void ApplyStep(Planes& img, const MotionBlur& s, Rng&) {
  if (s.length <= 1) return;
  const double rad = s.angle_deg * std::numbers::pi / 180.0;
  const double dx = std::cos(rad), dy = std::sin(rad);
  const double half = (s.length - 1) / 2.0;
  for (Plane& p : img.c) {
    Plane out(p.width, p.height, 0.0);
    for (int y = 0; y < p.height; ++y) {
      for (int x = 0; x < p.width; ++x) {
        double acc = 0.0;
        for (int k = 0; k < s.length; ++k) {
          const double t = k - half;
          acc += Bilinear(p, y + t * dy, x + t * dx);
        }
        out(y, x) = acc / s.length;
      }
    }
    p = std::move(out);
  }
}

void ApplyStep(Planes& img, const RainStreaks& s, Rng& rng) {
  const double rad = s.angle_deg * std::numbers::pi / 180.0;
  const double area = static_cast<double>(img.width) * img.height;
  const auto streaks =
      static_cast<long>(std::lround(s.density * area / std::max(1, s.length)));
  for (long i = 0; i < streaks; ++i) {
    const double x0 = rng.Uniform() * img.width;
    const double y0 = rng.Uniform() * img.height;
    for (int k = 0; k < s.length; ++k) {
      const int x = static_cast<int>(std::lround(x0 + k * std::cos(rad)));
      const int y = static_cast<int>(std::lround(y0 + k * std::sin(rad)));
      if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
      for (Plane& p : img.c) p(y, x) = 0.3 * p(y, x) + 0.7 * 0.9;
    }
  }
}

void ApplyStep(Planes& img, const SnowDots& s, Rng& rng) {
  const int side = 2 * s.radius + 1;
  const double area = static_cast<double>(img.width) * img.height;
  const auto flakes = static_cast<long>(std::lround(s.density * area / (side * side)));
  const double r2 = (s.radius + 0.5) * (s.radius + 0.5);
  for (long i = 0; i < flakes; ++i) {
    const int cx = static_cast<int>(rng.Below(img.width));
    const int cy = static_cast<int>(rng.Below(img.height));
    for (int y = cy - s.radius; y <= cy + s.radius; ++y) {
      for (int x = cx - s.radius; x <= cx + s.radius; ++x) {
        if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) > r2) continue;
        for (Plane& p : img.c) p(y, x) = 0.2 * p(y, x) + 0.8 * 0.95;
      }
    }
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::kInvalidParam, what);
}

struct Validator {
  void operator()(const GammaDark& s) const {
    Require(s.gamma >= 1.0 && s.gamma <= 5.0, "gamma must lie in [1,5]");
  }
  void operator()(const Haze& s) const {
    Require(s.transmission > 0.0 && s.transmission <= 1.0,
            "transmission must lie in (0,1]");
    Require(s.airlight >= 0.0 && s.airlight <= 1.0, "airlight must lie in [0,1]");
  }
  void operator()(const GaussianNoise& s) const {
    Require(s.sigma >= 0.0 && s.sigma <= 0.3, "sigma must lie in [0,0.3]");
  }
  void operator()(const MotionBlur& s) const {
    Require(s.length >= 1, "blur length must be >= 1");
    Require(std::isfinite(s.angle_deg), "blur angle must be finite");
  }
  void operator()(const RainStreaks& s) const {
    Require(s.density >= 0.0 && s.density <= 1.0, "density must lie in [0,1]");
    Require(s.length >= 1, "streak length must be >= 1");
    Require(std::isfinite(s.angle_deg), "streak angle must be finite");
  }
  void operator()(const SnowDots& s) const {
    Require(s.density >= 0.0 && s.density <= 1.0, "density must lie in [0,1]");
    Require(s.radius >= 0, "radius must be >= 0");
  }
};

}  // namespace

double Psnr(const ImageBuf& x, const ImageBuf& y) {
  RequireSameShape(x, y);
  auto a = x.data();
  auto b = y.data();
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sse += (a[i] - b[i]) * (a[i] - b[i]);
  const double mse = sse / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double Ssim(const ImageBuf& x, const ImageBuf& y) {
  RequireSameShape(x, y);
  if (std::min(x.width(), x.height()) < 2 * kSsimRadius + 1) {
    throw Error(ErrorCode::kTooSmall, "SSIM needs both sides >= 11");
  }
  const Plane px(x.width(), x.height(), Luma(x));
  const Plane py(y.width(), y.height(), Luma(y));
  const std::vector<double> k = GaussianKernel(kSsimSigma, kSsimRadius);
  const Plane mu_x = ValidFilter(px, k);
  const Plane mu_y = ValidFilter(py, k);
  const Plane xx = ValidFilter(Product(px, px), k);
  const Plane yy = ValidFilter(Product(py, py), k);
  const Plane xy = ValidFilter(Product(px, py), k);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.values.size(); ++i) {
    const double mx = mu_x.values[i], my = mu_y.values[i];
    const double vx = xx.values[i] - mx * mx;
    const double vy = yy.values[i] - my * my;
    const double cov = xy.values[i] - mx * my;
    total += ((2 * mx * my + kC1) * (2 * cov + kC2)) /
             ((mx * mx + my * my + kC1) * (vx + vy + kC2));
  }
  return total / static_cast<double>(mu_x.values.size());
}

void ValidateSpec(const DegradationSpec& spec) {
  for (const Degradation& d : spec.steps) std::visit(Validator{}, d);
}

ImageBuf ApplyDegradation(const ImageBuf& img, const DegradationSpec& spec) {
  ValidateSpec(spec);
  Planes planes(img);
  for (std::size_t i = 0; i < spec.steps.size(); ++i) {
    Rng rng(spec.seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
    std::visit([&](const auto& step) { ApplyStep(planes, step, rng); },
               spec.steps[i]);
  }
  return planes.ToImage();
}

}  // namespace restoragent::eval
