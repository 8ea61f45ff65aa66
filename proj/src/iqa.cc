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

#include "restoragent/iqa.h"

#include <algorithm>
#include <cmath>

#include "restoragent/error.h"
#include "restoragent/filters.h"

namespace restoragent::iqa {
namespace {

Plane LumaPlane(const ImageBuf& img) {
  return Plane(img.width(), img.height(), Luma(img));
}

bool IsRegistered(std::string_view name) {
  return std::find(kMetricNames.begin(), kMetricNames.end(), name) !=
         kMetricNames.end();
}

}  // namespace

double Sharpness(const ImageBuf& img) {
  static constexpr double kLaplacian[3][3] = {
      {0.0, 1.0, 0.0}, {1.0, -4.0, 1.0}, {0.0, 1.0, 0.0}};
  return Variance(Convolve3x3(LumaPlane(img), kLaplacian).values);
}

double NoiseSigma(const ImageBuf& img) {
  const Plane luma = LumaPlane(img);
  const Plane smooth = MedianFilter(luma, 1, 1);
  std::vector<double> residual(luma.values.size());
  for (std::size_t i = 0; i < residual.size(); ++i) {
    residual[i] = std::abs(luma.values[i] - smooth.values[i]);
  }
  return Median(std::move(residual)) / 0.6745;
}

double DarkChannelDensity(const ImageBuf& img, int patch) {
  Plane min_channel(img.width(), img.height(), 0.0);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    min_channel.values[i] =
        std::min({img.plane(0)[i], img.plane(1)[i], img.plane(2)[i]});
  }
  return Mean(MinFilter(min_channel, patch).values);
}

double MeanLuminance(const ImageBuf& img) { return Mean(Luma(img)); }

double RmsContrast(const ImageBuf& img) { return std::sqrt(Variance(Luma(img))); }

double Colorfulness(const ImageBuf& img) {
  const std::size_t n = img.pixel_count();
  std::vector<double> rg(n), yb(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = img.plane(0)[i], g = img.plane(1)[i], b = img.plane(2)[i];
    rg[i] = r - g;
    yb[i] = 0.5 * (r + g) - b;
  }
  const double mu_rg = Mean(rg), mu_yb = Mean(yb);
  return std::sqrt(Variance(rg) + Variance(yb)) +
         0.3 * std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb);
}

double Entropy(const ImageBuf& img) {
  std::array<double, 256> hist{};
  const std::vector<double> luma = Luma(img);
  for (double v : luma) hist[QuantizeSample(v)] += 1.0;
  double h = 0.0;
  for (double count : hist) {
    if (count == 0.0) continue;
    const double p = count / static_cast<double>(luma.size());
    h -= p * std::log2(p);
  }
  // -0.0 for a single occupied bin.
  return h == 0.0 ? 0.0 : h;
}

MetricWeights DefaultWeights() {
  MetricWeights w;
  for (std::string_view name : kMetricNames) w.emplace(name, 1.0);
  return w;
}

double OrientedScore(std::string_view name, double value) {
  if (name == kNoiseSigma || name == kDarkChannelDensity) return -value;
  if (name == kMeanLuminance) return 0.5 - std::abs(value - 0.5);
  if (!IsRegistered(name)) {
    throw Error(ErrorCode::kInvalidParam,
                "unknown metric name: " + std::string(name));
  }
  return value;
}

double AggregateQuality(const std::map<std::string, double>& scores,
                        const MetricWeights& weights) {
  for (const auto& [name, w] : weights) {
    if (!IsRegistered(name)) {
      throw Error(ErrorCode::kInvalidParam, "unknown metric weight: " + name);
    }
  }
  for (std::string_view name : kMetricNames) {
    if (weights.find(name) == weights.end()) {
      throw Error(ErrorCode::kInvalidParam,
                  "missing weight for " + std::string(name));
    }
  }
  double total = 0.0;
  for (const auto& [name, value] : scores) {
    total += weights.find(name)->second * OrientedScore(name, value);
  }
  return total;
}

ClassicalMetricBackend::ClassicalMetricBackend(MetricWeights weights)
    : weights_(std::move(weights)) {
  AggregateQuality({}, weights_);  // validates the weight map
}

QualityVector ClassicalMetricBackend::Evaluate(const ImageBuf& img) const {
  QualityVector qv;
  qv.scores.emplace(kSharpness, Sharpness(img));
  qv.scores.emplace(kNoiseSigma, NoiseSigma(img));
  qv.scores.emplace(kDarkChannelDensity, DarkChannelDensity(img));
  qv.scores.emplace(kMeanLuminance, MeanLuminance(img));
  qv.scores.emplace(kRmsContrast, RmsContrast(img));
  qv.scores.emplace(kColorfulness, Colorfulness(img));
  qv.scores.emplace(kEntropy, Entropy(img));
  qv.aggregate = AggregateQuality(qv.scores, weights_);
  return qv;
}

}  // namespace restoragent::iqa
