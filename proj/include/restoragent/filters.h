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

#ifndef RESTORAGENT_FILTERS_H_
#define RESTORAGENT_FILTERS_H_

#include <cstddef>
#include <span>
#include <vector>

namespace restoragent {

// A single-channel row-major plane. All filters below clamp coordinates to
// the image bounds (replicate border).
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(int w, int h, std::vector<double> v)
      : width(w), height(h), values(std::move(v)) {}
  Plane(int w, int h, double fill)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double& operator()(int y, int x) {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  double operator()(int y, int x) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
  double clamped(int y, int x) const;
};

Plane Convolve3x3(const Plane& in, const double (&kernel)[3][3]);

// Applies a symmetric 1-D kernel along rows, then columns.
Plane SeparableConvolve(const Plane& in, std::span<const double> kernel);

// Normalized Gaussian taps for offsets -radius..radius.
std::vector<double> GaussianKernel(double sigma, int radius);

// Median over a (2*ry+1) x (2*rx+1) window.
Plane MedianFilter(const Plane& in, int ry, int rx);

// Minimum over a patch x patch window; patch must be odd. Windows are clipped
// to the image rather than padded.
Plane MinFilter(const Plane& in, int patch);

double Mean(std::span<const double> v);
// Population variance.
double Variance(std::span<const double> v);
// Median of a copy of v; for even sizes, mean of the two middle values.
double Median(std::vector<double> v);

}  // namespace restoragent

#endif  // RESTORAGENT_FILTERS_H_
