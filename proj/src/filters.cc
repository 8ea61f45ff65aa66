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

#include "restoragent/filters.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "restoragent/error.h"

namespace restoragent {

double Plane::clamped(int y, int x) const {
  y = std::clamp(y, 0, height - 1);
  x = std::clamp(x, 0, width - 1);
  return (*this)(y, x);
}

Plane Convolve3x3(const Plane& in, const double (&kernel)[3][3]) {
  Plane out(in.width, in.height, 0.0);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          acc += kernel[dy + 1][dx + 1] * in.clamped(y + dy, x + dx);
        }
      }
      out(y, x) = acc;
    }
  }
  return out;
}

Plane SeparableConvolve(const Plane& in, std::span<const double> kernel) {
  const int radius = static_cast<int>(kernel.size() / 2);
  Plane tmp(in.width, in.height, 0.0);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] * in.clamped(y, x + k);
      }
      tmp(y, x) = acc;
    }
  }
  Plane out(in.width, in.height, 0.0);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] * tmp.clamped(y + k, x);
      }
      out(y, x) = acc;
    }
  }
  return out;
}

std::vector<double> GaussianKernel(double sigma, int radius) {
  std::vector<double> k(2 * radius + 1);
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
  }
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= sum;
  return k;
}

Plane MedianFilter(const Plane& in, int ry, int rx) {
  Plane out(in.width, in.height, 0.0);
  std::vector<double> window;
  window.reserve(static_cast<std::size_t>(2 * ry + 1) * (2 * rx + 1));
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      window.clear();
      for (int dy = -ry; dy <= ry; ++dy) {
        for (int dx = -rx; dx <= rx; ++dx) {
          window.push_back(in.clamped(y + dy, x + dx));
        }
      }
      // Window sizes are odd, so the middle element is the median.
      auto mid = window.begin() + window.size() / 2;
      std::nth_element(window.begin(), mid, window.end());
      out(y, x) = *mid;
    }
  }
  return out;
}

Plane MinFilter(const Plane& in, int patch) {
  if (patch < 1 || patch % 2 == 0) {
    throw Error(ErrorCode::kInvalidParam,
                "patch must be odd and positive, got " + std::to_string(patch));
  }
  const int r = patch / 2;
  // Box minimum is separable: rows first, then columns.
  Plane tmp(in.width, in.height, 0.0);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double m = in(y, x);
      for (int k = std::max(0, x - r); k <= std::min(in.width - 1, x + r); ++k) {
        m = std::min(m, in(y, k));
      }
      tmp(y, x) = m;
    }
  }
  Plane out(in.width, in.height, 0.0);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      double m = tmp(y, x);
      for (int k = std::max(0, y - r); k <= std::min(in.height - 1, y + r); ++k) {
        m = std::min(m, tmp(k, x));
      }
      out(y, x) = m;
    }
  }
  return out;
}

double Mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double Variance(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double mu = Mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(v.size());
}

double Median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace restoragent
