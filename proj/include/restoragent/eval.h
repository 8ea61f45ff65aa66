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

#ifndef RESTORAGENT_EVAL_H_
#define RESTORAGENT_EVAL_H_

#include <cstdint>
#include <variant>
#include <vector>

#include "restoragent/image.h"

// Full-reference metrics and seeded synthetic degradations used as fixtures.
namespace restoragent::eval {

inline constexpr double kPsnrCap = 99.0;

// 10*log10(1/MSE) over all three channels, peak 1.0. Identical images give
// kPsnrCap.
double Psnr(const ImageBuf& x, const ImageBuf& y);

// Mean SSIM on luma: 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
// K2 = 0.03, L = 1, averaged over window positions fully inside the image.
double Ssim(const ImageBuf& x, const ImageBuf& y);

struct GammaDark {
  double gamma = 1.0;  // v -> v^gamma, gamma in [1,5]
};
struct Haze {
  double transmission = 1.0;  // t in (0,1]
  double airlight = 1.0;      // A in [0,1]
};
struct GaussianNoise {
  double sigma = 0.0;  // [0,0.3], clamped afterwards
};
struct MotionBlur {
  int length = 1;  // taps along the motion direction
  double angle_deg = 0.0;
};
struct RainStreaks {
  double density = 0.0;  // fraction of pixels covered, roughly
  int length = 9;
  double angle_deg = 80.0;
};
struct SnowDots {
  double density = 0.0;
  int radius = 1;
};

using Degradation =
    std::variant<GammaDark, Haze, GaussianNoise, MotionBlur, RainStreaks, SnowDots>;

// Steps are applied in order. Each step draws from its own stream derived
// from (seed, step index), so inserting a deterministic step does not perturb
// the noise of later ones.
struct DegradationSpec {
  std::vector<Degradation> steps;
  std::uint64_t seed = 0;
};

// Throws kInvalidParam for out-of-range parameters.
void ValidateSpec(const DegradationSpec& spec);

ImageBuf ApplyDegradation(const ImageBuf& img, const DegradationSpec& spec);

}  // namespace restoragent::eval

#endif  // RESTORAGENT_EVAL_H_
