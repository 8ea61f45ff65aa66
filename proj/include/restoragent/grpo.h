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

#ifndef RESTORAGENT_GRPO_H_
#define RESTORAGENT_GRPO_H_

#include <cstdint>
#include <span>
#include <vector>

#include "restoragent/image.h"
#include "restoragent/iqa.h"
#include "restoragent/tools.h"
#include "restoragent/types.h"

namespace restoragent::grpo {

// Probabilities at or below this are treated as a degenerate policy.
inline constexpr double kProbabilityFloor = 1e-12;

struct GrpoConfig {
  double eps_clip = 0.2;
  double beta = 0.04;
  double eps_num = 1e-8;
  int n = 8;  // group size
  double learning_rate = 0.05;
  int iterations = 200;
  int inner_steps = 1;  // gradient steps per sampled group
};

// Throws kConfig.
void ValidateConfig(const GrpoConfig& config);

// A_i = (r_i - mean r) / (population std r + eps_num). Throws kInvalidParam
// for fewer than two rewards or a non-binary reward.
std::vector<double> Advantages(std::span<const int> rewards, double eps_num = 1e-8);

// p_new / p_old; throws kDegeneratePolicy when p_old <= kProbabilityFloor.
double Ratio(double p_new, double p_old);

// min(rho * A, clip(rho, 1 - eps, 1 + eps) * A).
double ClippedTerm(double rho, double advantage, double eps_clip);

// Group mean of ClippedTerm; throws kLengthMismatch.
double LClip(std::span<const double> rhos, std::span<const double> advantages,
             double eps_clip);

// r - log r - 1 with r = p_ref / p_theta; throws kDegeneratePolicy when
// either probability is at or below the floor.
double KlEstimate(double p_ref, double p_theta);

// -l_clip + beta * kl_mean.
double FinalLoss(double l_clip, double kl_mean, double beta);

// Row-major [features x actions] weight matrix; logits = features . W.
struct Weights {
  int features = 0;
  int actions = 0;
  std::vector<double> values;

  Weights() = default;
  Weights(int f, int a) : features(f), actions(a), values(static_cast<std::size_t>(f) * a) {}
  double& at(int f, int a) { return values[static_cast<std::size_t>(f) * actions + a]; }
  double at(int f, int a) const { return values[static_cast<std::size_t>(f) * actions + a]; }
  friend bool operator==(const Weights&, const Weights&) = default;
};

struct PolicyParams {
  Weights theta;
  Weights theta_old;
  Weights theta_ref;
};

// Softmax over features . W; throws kShapeMismatch.
std::vector<double> Policy(const Weights& w, std::span<const double> features);

struct Group {
  std::vector<int> actions;
  std::vector<double> advantages;
};

// Final loss of one group as a function of params.theta (old and reference
// policies held fixed).
double GroupLoss(const PolicyParams& params, std::span<const double> features,
                 const Group& group, const GrpoConfig& config);

// Exact gradient of GroupLoss with respect to params.theta. At the clip
// kink the unclipped branch carries the gradient whenever it attains the
// minimum. Throws kShapeMismatch or kLengthMismatch.
Weights PolicyGrad(const PolicyParams& params, std::span<const double> features,
                   const Group& group, const GrpoConfig& config);

// One bandit state: features and the reward of each action.
struct BanditState {
  std::vector<double> features;
  std::vector<int> rewards;  // indexed by action, binary
};

struct BanditEnv {
  std::vector<BanditState> states;
  int actions = kNumTasks;
};

// Bias followed by the quality metrics in registry order.
std::vector<double> StateFeatures(const QualityVector& qv);

// A state built from a degraded image: action t earns 1 iff t is the task
// the heuristic perceiver recommends and the first default tool for t
// earns reference reward 1 on the image.
BanditState FixtureState(const ImageBuf& img, const tools::ToolRegistry& registry,
                         const iqa::MetricBackend& metrics);

struct CurvePoint {
  int iteration = 0;
  double mean_reward = 0.0;    // sampled, averaged over states
  double loss = 0.0;           // at the start of the iteration
  double expected_reward = 0.0;  // under the policy, averaged over states
};

struct TrainResult {
  PolicyParams params;
  std::vector<CurvePoint> curve;
};

// Zero-initialized weights (uniform policy); theta_ref frozen at init and
// theta_old refreshed each iteration. Bit-reproducible for a given seed.
TrainResult TrainToyPolicy(const BanditEnv& env, const GrpoConfig& config, std::uint64_t seed);

// Trailing mean over `window` points; the first window - 1 entries average
// what is available.
std::vector<double> MovingAverage(std::span<const double> values, int window);

}  // namespace restoragent::grpo

#endif  // RESTORAGENT_GRPO_H_
