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

#ifndef RESTORAGENT_IQA_H_
#define RESTORAGENT_IQA_H_

#include <array>
#include <map>
#include <string>
#include <string_view>

#include "restoragent/image.h"
#include "restoragent/types.h"

// No-reference quality metrics. These are classical proxies; a learned model
// can replace them by implementing MetricBackend.
namespace restoragent::iqa {

inline constexpr std::string_view kSharpness = "sharpness";
inline constexpr std::string_view kNoiseSigma = "noise_sigma";
inline constexpr std::string_view kDarkChannelDensity = "dark_channel_density";
inline constexpr std::string_view kMeanLuminance = "mean_luminance";
inline constexpr std::string_view kRmsContrast = "rms_contrast";
inline constexpr std::string_view kColorfulness = "colorfulness";
inline constexpr std::string_view kEntropy = "entropy";

inline constexpr std::array<std::string_view, 7> kMetricNames = {
    kSharpness,     kNoiseSigma,   kDarkChannelDensity, kMeanLuminance,
    kRmsContrast,   kColorfulness, kEntropy,
};

inline constexpr int kDefaultDarkChannelPatch = 15;

// Variance of the 4-neighbour Laplacian of luma.
double Sharpness(const ImageBuf& img);
// median(|luma - median3x3(luma)|) / 0.6745.
double NoiseSigma(const ImageBuf& img);
double DarkChannelDensity(const ImageBuf& img,
                          int patch = kDefaultDarkChannelPatch);
double MeanLuminance(const ImageBuf& img);
double RmsContrast(const ImageBuf& img);
// Hasler-Suesstrunk colorfulness on [0,1] channels.
double Colorfulness(const ImageBuf& img);
// Shannon entropy (bits) of the 256-bin luma histogram.
double Entropy(const ImageBuf& img);

using MetricWeights = std::map<std::string, double, std::less<>>;

MetricWeights DefaultWeights();

// Signed weighted sum. noise_sigma and dark_channel_density count against
// quality; mean_luminance contributes 0.5 - |v - 0.5| so mid-gray scores best
// and a zero luminance contributes nothing.
double AggregateQuality(const std::map<std::string, double>& scores,
                        const MetricWeights& weights);

// Oriented contribution of one metric before weighting.
double OrientedScore(std::string_view name, double value);

class MetricBackend {
 public:
  virtual ~MetricBackend() = default;
  virtual QualityVector Evaluate(const ImageBuf& img) const = 0;
};

class ClassicalMetricBackend final : public MetricBackend {
 public:
  explicit ClassicalMetricBackend(MetricWeights weights = DefaultWeights());
  QualityVector Evaluate(const ImageBuf& img) const override;
  const MetricWeights& weights() const { return weights_; }

 private:
  MetricWeights weights_;
};

}  // namespace restoragent::iqa

#endif  // RESTORAGENT_IQA_H_
