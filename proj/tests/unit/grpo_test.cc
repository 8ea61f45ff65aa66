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

#include "restoragent/grpo.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "restoragent/error.h"
#include "restoragent/eval.h"
#include "restoragent/iqa.h"
#include "restoragent/rng.h"
#include "restoragent/tools.h"
#include "test_util.h"

namespace restoragent::grpo {
namespace {

using testing::DataPath;

std::optional<ErrorCode> CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

Weights RandomWeights(int f, int a, double scale, Rng& rng) {
  Weights w(f, a);
  for (double& v : w.values) v = scale * rng.Normal();
  return w;
}

BanditEnv HazyEnv() {
  static const BanditEnv env = [] {
    const ImageBuf ref = LoadImage(DataPath("reference_scene.png"));
    const ImageBuf hazy = eval::ApplyDegradation(ref, {{eval::Haze{0.6, 1.0}}, 0});
    const iqa::ClassicalMetricBackend metrics;
    return BanditEnv{{FixtureState(hazy, tools::DefaultRegistry(), metrics)}};
  }();
  return env;
}

// ---- advantages ----

TEST(AdvantagesTest, BalancedGroupIsPlusMinusOne) {
  const std::vector<int> r = {1, 0, 1, 0};
  const auto a = Advantages(r);
  ASSERT_EQ(a.size(), 4u);
  EXPECT_NEAR(a[0], 1.0, 1e-6);
  EXPECT_NEAR(a[1], -1.0, 1e-6);
  EXPECT_NEAR(a[2], 1.0, 1e-6);
  EXPECT_NEAR(a[3], -1.0, 1e-6);
}

TEST(AdvantagesTest, UniformGroupIsZero) {
  for (int v : {0, 1}) {
    const std::vector<int> r(8, v);
    for (double a : Advantages(r)) EXPECT_EQ(a, 0.0);
  }
}

TEST(AdvantagesTest, SingleSuccess) {
  const std::vector<int> r = {1, 0, 0, 0};
  const auto a = Advantages(r);
  EXPECT_NEAR(a[0], std::sqrt(3.0), 1e-6);
  for (int i = 1; i < 4; ++i) EXPECT_NEAR(a[i], -1.0 / std::sqrt(3.0), 1e-6);
}

TEST(AdvantagesTest, RejectsBadGroups) {
  EXPECT_EQ(CodeOf([] { Advantages(std::vector<int>{1}); }), ErrorCode::kInvalidParam);
  EXPECT_EQ(CodeOf([] { Advantages(std::vector<int>{1, 2}); }), ErrorCode::kInvalidParam);
}

TEST(AdvantagesTest, NormalizedOnRandomGroups) {
  Rng rng(7);
  int checked = 0;
  while (checked < 500) {
    const int n = 2 + static_cast<int>(rng.Below(30));
    std::vector<int> r(n);
    for (int& v : r) v = rng.Uniform() < 0.5 ? 1 : 0;
    if (std::all_of(r.begin(), r.end(), [&](int v) { return v == r[0]; })) continue;
    const auto a = Advantages(r);
    double mean = 0.0, var = 0.0;
    for (double v : a) mean += v;
    mean /= n;
    for (double v : a) var += (v - mean) * (v - mean);
    // The normalized std is s / (s + eps) for raw population std s, so its
    // distance from 1 is eps / (s + eps). That is within 2 * eps only when
    // s >= 0.5, i.e. for balanced groups; lopsided binary groups sit further out.
    double raw_mean = 0.0, raw_var = 0.0;
    for (int v : r) raw_mean += v;
    raw_mean /= n;
    for (int v : r) raw_var += (v - raw_mean) * (v - raw_mean);
    const double s = std::sqrt(raw_var / n);
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(var / n), s / (s + 1e-8), 1e-12);
    if (s >= 0.5) EXPECT_NEAR(std::sqrt(var / n), 1.0, 2e-8);
    ++checked;
  }
}

TEST(AdvantagesTest, DuplicationKeepsMultiset) {
  const std::vector<int> r = {1, 0, 0, 1, 1};
  std::vector<int> doubled;
  for (int v : r) doubled.insert(doubled.end(), {v, v});
  const auto a = Advantages(r);
  const auto b = Advantages(doubled);
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_NEAR(b[2 * i], a[i], 1e-12);
    EXPECT_NEAR(b[2 * i + 1], a[i], 1e-12);
  }
}

// ---- ratio, clipping, KL, loss ----

TEST(RatioTest, Examples) {
  EXPECT_DOUBLE_EQ(Ratio(0.3, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(Ratio(0.4, 0.2), 2.0);
  EXPECT_EQ(CodeOf([] { Ratio(0.5, 0.0); }), ErrorCode::kDegeneratePolicy);
  EXPECT_EQ(CodeOf([] { Ratio(0.5, 1e-12); }), ErrorCode::kDegeneratePolicy);
}

TEST(ClippedTermTest, Examples) {
  EXPECT_DOUBLE_EQ(ClippedTerm(1.5, 1.0, 0.2), 1.2);
  EXPECT_DOUBLE_EQ(ClippedTerm(0.5, -1.0, 0.2), -0.8);
  EXPECT_DOUBLE_EQ(ClippedTerm(1.5, -1.0, 0.2), -1.5);
  EXPECT_DOUBLE_EQ(ClippedTerm(0.5, 1.0, 0.2), 0.5);
  EXPECT_DOUBLE_EQ(ClippedTerm(1.1, 2.0, 0.2), 2.2);
}

TEST(ClippedTermTest, NeverExceedsUnclipped) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double rho = std::exp(3.0 * rng.Normal());
    const double adv = 3.0 * rng.Normal();
    const double eps = 0.01 + 0.9 * rng.Uniform();
    EXPECT_LE(ClippedTerm(rho, adv, eps), rho * adv);
  }
}

TEST(LClipTest, Examples) {
  const std::vector<double> rhos = {1.5, 0.5}, advs = {1.0, -1.0};
  EXPECT_NEAR(LClip(rhos, advs, 0.2), 0.2, 1e-15);
  const std::vector<double> ones = {1.0, 1.0, 1.0}, a3 = {0.5, -0.25, 0.1};
  EXPECT_NEAR(LClip(ones, a3, 0.2), (0.5 - 0.25 + 0.1) / 3.0, 1e-15);
  const std::vector<double> zeros = {0.0, 0.0};
  EXPECT_EQ(LClip(rhos, zeros, 0.2), 0.0);
  const std::vector<double> one = {1.0};
  EXPECT_EQ(CodeOf([&] { LClip(rhos, one, 0.2); }), ErrorCode::kLengthMismatch);
}

TEST(KlTest, Examples) {
  EXPECT_EQ(KlEstimate(0.3, 0.3), 0.0);
  EXPECT_NEAR(KlEstimate(0.4, 0.2), 0.306853, 1e-6);
  EXPECT_NEAR(KlEstimate(0.1, 0.2), 0.193147, 1e-6);
  EXPECT_EQ(CodeOf([] { KlEstimate(0.0, 0.5); }), ErrorCode::kDegeneratePolicy);
  EXPECT_EQ(CodeOf([] { KlEstimate(0.5, 0.0); }), ErrorCode::kDegeneratePolicy);
}

TEST(KlTest, NonNegativeOnLogGrid) {
  for (int k = -600; k <= 600; ++k) {
    const double r = std::pow(10.0, k / 100.0);
    const double kl = r <= 1.0 ? KlEstimate(0.5 * r, 0.5) : KlEstimate(0.5, 0.5 / r);
    if (k == 0) {
      EXPECT_NEAR(kl, 0.0, 1e-12);
    } else {
      EXPECT_GT(kl, 1e-12) << "r=" << r;
    }
  }
}

TEST(FinalLossTest, Examples) {
  EXPECT_DOUBLE_EQ(FinalLoss(0.2, 0.0, 0.04), -0.2);
  EXPECT_NEAR(FinalLoss(0.0, 0.306853, 0.04), 0.0122741, 1e-7);
  EXPECT_DOUBLE_EQ(FinalLoss(0.3, 5.0, 0.0), -0.3);
}

TEST(ConfigTest, Validation) {
  EXPECT_NO_THROW(ValidateConfig({}));
  GrpoConfig c;
  c.eps_clip = 0.0;
  EXPECT_EQ(CodeOf([&] { ValidateConfig(c); }), ErrorCode::kConfig);
  c = {};
  c.n = 1;
  EXPECT_EQ(CodeOf([&] { ValidateConfig(c); }), ErrorCode::kConfig);
  c = {};
  c.beta = -1.0;
  EXPECT_EQ(CodeOf([&] { ValidateConfig(c); }), ErrorCode::kConfig);
  c = {};
  c.learning_rate = 0.0;
  EXPECT_EQ(CodeOf([&] { ValidateConfig(c); }), ErrorCode::kConfig);
}

// ---- policy and gradient ----

TEST(PolicyTest, ZeroWeightsAreUniform) {
  const Weights w(3, 7);
  const std::vector<double> x = {1.0, 0.5, -2.0};
  for (double p : Policy(w, x)) EXPECT_NEAR(p, 1.0 / 7.0, 1e-15);
}

TEST(PolicyTest, SumsToOneAndRejectsShape) {
  Rng rng(1);
  const Weights w = RandomWeights(4, 5, 3.0, rng);
  const std::vector<double> x = {1.0, 2.0, -1.0, 0.3};
  const auto p = Policy(w, x);
  double s = 0.0;
  for (double v : p) s += v;
  EXPECT_NEAR(s, 1.0, 1e-12);
  const std::vector<double> short_x = {1.0};
  EXPECT_EQ(CodeOf([&] { Policy(w, short_x); }), ErrorCode::kShapeMismatch);
}

TEST(PolicyGradTest, ZeroAdvantagesAtReferenceIsZero) {
  Rng rng(2);
  const Weights w = RandomWeights(3, 7, 0.5, rng);
  const PolicyParams params{w, w, w};
  const std::vector<double> x = {1.0, 0.2, 0.7};
  const Group g{{0, 3, 3, 6}, {0.0, 0.0, 0.0, 0.0}};
  for (double v : PolicyGrad(params, x, g, {}).values) EXPECT_EQ(v, 0.0);
}

TEST(PolicyGradTest, ShapeAndLengthErrors) {
  const Weights w(2, 3);
  const PolicyParams params{w, w, w};
  const std::vector<double> x = {1.0, 0.0};
  EXPECT_EQ(CodeOf([&] { PolicyGrad(params, x, Group{{0, 1}, {1.0}}, {}); }),
            ErrorCode::kLengthMismatch);
  EXPECT_EQ(CodeOf([&] { PolicyGrad(params, x, Group{{0, 5}, {1.0, -1.0}}, {}); }),
            ErrorCode::kShapeMismatch);
  const PolicyParams bad{w, Weights(3, 3), w};
  EXPECT_EQ(CodeOf([&] { PolicyGrad(bad, x, Group{{0, 1}, {1.0, -1.0}}, {}); }),
            ErrorCode::kShapeMismatch);
}

TEST(PolicyGradTest, SingleSampleSymbolic) {
  // Two actions, one feature: pi(0) = sigmoid(w0 - w1), so
  // d log pi(0) / d w0 = 1 - pi(0) and d log pi(0) / d w1 = -(1 - pi(0)).
  Weights theta(1, 2), old(1, 2);
  theta.at(0, 0) = 0.1;
  old.at(0, 0) = 0.05;
  const PolicyParams params{theta, old, Weights(1, 2)};
  const std::vector<double> x = {1.0};
  GrpoConfig config;
  config.beta = 0.0;
  const double adv = 0.7;
  const auto pi = Policy(theta, x);
  const auto pi_old = Policy(old, x);
  const double rho = pi[0] / pi_old[0];
  ASSERT_LT(std::abs(rho - 1.0), config.eps_clip);
  const Weights g = PolicyGrad(params, x, Group{{0}, {adv}}, config);
  EXPECT_NEAR(g.at(0, 0), -adv * rho * (1.0 - pi[0]), 1e-15);
  EXPECT_NEAR(g.at(0, 1), adv * rho * (1.0 - pi[0]), 1e-15);
}

TEST(PolicyGradTest, ClippedSampleContributesOnlyKl) {
  Weights theta(1, 2);
  theta.at(0, 0) = 2.0;  // pi(0) far above the uniform old policy
  const PolicyParams params{theta, Weights(1, 2), theta};
  const std::vector<double> x = {1.0};
  const Weights g = PolicyGrad(params, x, Group{{0}, {1.0}}, {});
  for (double v : g.values) EXPECT_EQ(v, 0.0);
}

struct FdResult {
  double rel_error;
  bool usable;
};

FdResult FiniteDifferenceCheck(Rng& rng) {
  const int f = 2 + static_cast<int>(rng.Below(4));
  const int a = 2 + static_cast<int>(rng.Below(6));
  const int n = 2 + static_cast<int>(rng.Below(8));
  PolicyParams params;
  params.theta = RandomWeights(f, a, 0.5, rng);
  params.theta_old = params.theta;
  for (double& v : params.theta_old.values) v += 0.3 * rng.Normal();
  params.theta_ref = RandomWeights(f, a, 0.5, rng);
  std::vector<double> x(f);
  for (double& v : x) v = rng.Normal();
  Group g;
  for (int i = 0; i < n; ++i) {
    g.actions.push_back(static_cast<int>(rng.Below(a)));
    g.advantages.push_back(rng.Normal());
  }
  GrpoConfig config;
  config.beta = 0.04 + 0.2 * rng.Uniform();

  // Skip instances whose ratios sit on a clip kink; the loss is not
  // differentiable there.
  const auto pi = Policy(params.theta, x);
  const auto pi_old = Policy(params.theta_old, x);
  for (int act : g.actions) {
    const double rho = pi[act] / pi_old[act];
    if (std::abs(rho - (1.0 - config.eps_clip)) < 1e-3 ||
        std::abs(rho - (1.0 + config.eps_clip)) < 1e-3) {
      return {0.0, false};
    }
  }
  const Weights grad = PolicyGrad(params, x, g, config);
  const double h = 1e-5;
  double max_diff = 0.0, max_g = 0.0, max_fd = 0.0;
  for (std::size_t j = 0; j < grad.values.size(); ++j) {
    PolicyParams plus = params, minus = params;
    plus.theta.values[j] += h;
    minus.theta.values[j] -= h;
    const double fd = (GroupLoss(plus, x, g, config) - GroupLoss(minus, x, g, config)) / (2 * h);
    max_diff = std::max(max_diff, std::abs(fd - grad.values[j]));
    max_g = std::max(max_g, std::abs(grad.values[j]));
    max_fd = std::max(max_fd, std::abs(fd));
  }
  return {max_diff / std::max({max_g, max_fd, 1e-8}), true};
}

TEST(PolicyGradTest, MatchesFiniteDifferences) {
  Rng rng(11);
  int checked = 0;
  double worst = 0.0;
  while (checked < 200) {
    const FdResult r = FiniteDifferenceCheck(rng);
    if (!r.usable) continue;
    worst = std::max(worst, r.rel_error);
    ++checked;
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(PolicyGradTest, LossGradientMatchesSingleStepDecrease) {
  Rng rng(5);
  PolicyParams params;
  params.theta = RandomWeights(3, 4, 0.3, rng);
  params.theta_old = params.theta;
  params.theta_ref = Weights(3, 4);
  const std::vector<double> x = {1.0, -0.5, 0.25};
  const Group g{{0, 1, 2, 0}, {1.0, -1.0, -1.0, 1.0}};
  const double before = GroupLoss(params, x, g, {});
  const Weights grad = PolicyGrad(params, x, g, {});
  for (std::size_t j = 0; j < grad.values.size(); ++j) {
    params.theta.values[j] -= 1e-3 * grad.values[j];
  }
  EXPECT_LT(GroupLoss(params, x, g, {}), before);
}

// ---- toy training ----

TEST(BanditTest, HazyFixtureRewardsOnlyDehaze) {
  const BanditEnv env = HazyEnv();
  ASSERT_EQ(env.states.size(), 1u);
  const auto& rewards = env.states[0].rewards;
  ASSERT_EQ(rewards.size(), static_cast<std::size_t>(kNumTasks));
  for (int a = 0; a < kNumTasks; ++a) {
    EXPECT_EQ(rewards[a], a == TaskCode(RestorationTask::kDehaze) ? 1 : 0) << a;
  }
  EXPECT_EQ(env.states[0].features.size(), 1 + iqa::kMetricNames.size());
  EXPECT_EQ(env.states[0].features[0], 1.0);
}

TEST(TrainTest, HazyStateLearnsDehaze) {
  const BanditEnv env = HazyEnv();
  const int dehaze = TaskCode(RestorationTask::kDehaze);
  const auto init = Policy(Weights(env.states[0].features.size(), kNumTasks),
                           env.states[0].features);
  EXPECT_NEAR(init[dehaze], 1.0 / 7.0, 1e-12);
  const TrainResult r = TrainToyPolicy(env, {}, 0);
  ASSERT_EQ(r.curve.size(), 200u);
  EXPECT_NEAR(r.curve.front().expected_reward, 1.0 / 7.0, 1e-12);
  EXPECT_GT(Policy(r.params.theta, env.states[0].features)[dehaze], 0.9);
}

TEST(TrainTest, ExpectedRewardSettlesBelowOne) {
  // Mixed groups push P(Dehaze) up; all-correct groups carry zero advantage
  // and leave only the KL pull toward the uniform reference. The two balance
  // below 1, so the curve rises and then flattens with small fluctuations.
  const TrainResult r = TrainToyPolicy(HazyEnv(), {}, 0);
  std::vector<double> expected;
  for (const CurvePoint& p : r.curve) expected.push_back(p.expected_reward);
  const auto ma = MovingAverage(expected, 20);
  for (std::size_t i = 1; i <= 50; ++i) EXPECT_GE(ma[i], ma[i - 1]) << "iteration " << i;
  for (std::size_t i = 100; i < expected.size(); ++i) {
    EXPECT_GT(expected[i], 0.98);
    EXPECT_LT(expected[i], 0.995);
  }
}

TEST(TrainTest, AllRewardedEnvLeavesWeightsUnchanged) {
  BanditEnv env;
  env.states.push_back({{1.0, 0.3, -0.2}, std::vector<int>(kNumTasks, 1)});
  GrpoConfig config;
  config.iterations = 50;
  const TrainResult r = TrainToyPolicy(env, config, 4);
  for (double v : r.params.theta.values) EXPECT_EQ(v, 0.0);
  for (const CurvePoint& p : r.curve) EXPECT_EQ(p.mean_reward, 1.0);
}

TEST(TrainTest, BitReproducible) {
  GrpoConfig config;
  config.iterations = 60;
  const TrainResult a = TrainToyPolicy(HazyEnv(), config, 9);
  const TrainResult b = TrainToyPolicy(HazyEnv(), config, 9);
  EXPECT_EQ(a.params.theta, b.params.theta);
  ASSERT_EQ(a.curve.size(), b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    EXPECT_EQ(a.curve[i].mean_reward, b.curve[i].mean_reward);
    EXPECT_EQ(a.curve[i].loss, b.curve[i].loss);
  }
  const TrainResult c = TrainToyPolicy(HazyEnv(), config, 10);
  EXPECT_NE(a.params.theta, c.params.theta);
}

TEST(TrainTest, RejectsInvalidEnv) {
  EXPECT_EQ(CodeOf([] { TrainToyPolicy(BanditEnv{}, {}, 0); }), ErrorCode::kInvalidParam);
  BanditEnv env;
  env.states.push_back({{1.0}, {1, 0}});
  EXPECT_EQ(CodeOf([&] { TrainToyPolicy(env, {}, 0); }), ErrorCode::kShapeMismatch);
}

TEST(MovingAverageTest, Values) {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  const auto ma = MovingAverage(v, 2);
  const std::vector<double> want = {1.0, 1.5, 2.5, 3.5, 4.5};
  EXPECT_EQ(ma, want);
  EXPECT_EQ(CodeOf([&] { MovingAverage(v, 0); }), ErrorCode::kInvalidParam);
}

}  // namespace
}  // namespace restoragent::grpo
