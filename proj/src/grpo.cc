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

#include <algorithm>
#include <cmath>
#include <string>

#include "restoragent/error.h"
#include "restoragent/orchestrator.h"
#include "restoragent/rng.h"

namespace restoragent::grpo {
namespace {

void CheckProbability(double p, const char* what) {
  if (!(p > kProbabilityFloor)) {
    throw Error(ErrorCode::kDegeneratePolicy,
                std::string(what) + " probability at or below floor: " + std::to_string(p));
  }
}

void CheckShapes(const PolicyParams& params, std::span<const double> features) {
  const Weights& w = params.theta;
  for (const Weights* other : {&params.theta_old, &params.theta_ref}) {
    if (other->features != w.features || other->actions != w.actions) {
      throw Error(ErrorCode::kShapeMismatch, "policy snapshots differ in shape");
    }
  }
  if (static_cast<int>(features.size()) != w.features) {
    throw Error(ErrorCode::kShapeMismatch, "feature length does not match weights");
  }
}

void CheckGroup(const Group& group, int actions) {
  if (group.actions.size() != group.advantages.size()) {
    throw Error(ErrorCode::kLengthMismatch, "actions and advantages differ in length");
  }
  if (group.actions.empty()) throw Error(ErrorCode::kLengthMismatch, "empty group");
  for (int a : group.actions) {
    if (a < 0 || a >= actions) throw Error(ErrorCode::kShapeMismatch, "action out of range");
  }
}

int Sample(std::span<const double> probs, Rng& rng) {
  const double u = rng.Uniform();
  double acc = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    acc += probs[a];
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

void ValidateConfig(const GrpoConfig& c) {
  if (!(c.eps_clip > 0.0 && c.eps_clip < 1.0)) {
    throw Error(ErrorCode::kConfig, "eps_clip must lie in (0, 1)");
  }
  if (!(c.beta >= 0.0)) throw Error(ErrorCode::kConfig, "beta must be >= 0");
  if (!(c.eps_num > 0.0)) throw Error(ErrorCode::kConfig, "eps_num must be > 0");
  if (c.n < 2) throw Error(ErrorCode::kConfig, "group size must be >= 2");
  if (!(c.learning_rate > 0.0)) throw Error(ErrorCode::kConfig, "learning_rate must be > 0");
  if (c.iterations < 0) throw Error(ErrorCode::kConfig, "iterations must be >= 0");
  if (c.inner_steps < 1) throw Error(ErrorCode::kConfig, "inner_steps must be >= 1");
}

std::vector<double> Advantages(std::span<const int> rewards, double eps_num) {
  if (rewards.size() < 2) {
    throw Error(ErrorCode::kInvalidParam, "a reward group needs at least two members");
  }
  double mean = 0.0;
  for (int r : rewards) {
    if (r != 0 && r != 1) throw Error(ErrorCode::kInvalidParam, "rewards must be binary");
    mean += r;
  }
  const double n = static_cast<double>(rewards.size());
  mean /= n;
  double var = 0.0;
  for (int r : rewards) var += (r - mean) * (r - mean);
  const double denom = std::sqrt(var / n) + eps_num;
  std::vector<double> out;
  out.reserve(rewards.size());
  for (int r : rewards) out.push_back((r - mean) / denom);
  return out;
}

double Ratio(double p_new, double p_old) {
  CheckProbability(p_old, "old policy");
  return p_new / p_old;
}

double ClippedTerm(double rho, double advantage, double eps_clip) {
  const double clipped = std::clamp(rho, 1.0 - eps_clip, 1.0 + eps_clip);
  return std::min(rho * advantage, clipped * advantage);
}

double LClip(std::span<const double> rhos, std::span<const double> advantages,
             double eps_clip) {
  if (rhos.size() != advantages.size()) {
    throw Error(ErrorCode::kLengthMismatch, "ratios and advantages differ in length");
  }
  if (rhos.empty()) throw Error(ErrorCode::kLengthMismatch, "empty group");
  double sum = 0.0;
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    sum += ClippedTerm(rhos[i], advantages[i], eps_clip);
  }
  return sum / static_cast<double>(rhos.size());
}

double KlEstimate(double p_ref, double p_theta) {
  CheckProbability(p_ref, "reference policy");
  CheckProbability(p_theta, "current policy");
  const double r = p_ref / p_theta;
  return r - std::log(r) - 1.0;
}

double FinalLoss(double l_clip, double kl_mean, double beta) { return -l_clip + beta * kl_mean; }

std::vector<double> Policy(const Weights& w, std::span<const double> features) {
  if (static_cast<int>(features.size()) != w.features) {
    throw Error(ErrorCode::kShapeMismatch, "feature length does not match weights");
  }
  std::vector<double> logits(w.actions, 0.0);
  for (int f = 0; f < w.features; ++f) {
    for (int a = 0; a < w.actions; ++a) logits[a] += features[f] * w.at(f, a);
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& l : logits) total += (l = std::exp(l - top));
  for (double& l : logits) l /= total;
  return logits;
}

double GroupLoss(const PolicyParams& params, std::span<const double> features,
                 const Group& group, const GrpoConfig& config) {
  CheckShapes(params, features);
  CheckGroup(group, params.theta.actions);
  const auto pi = Policy(params.theta, features);
  const auto pi_old = Policy(params.theta_old, features);
  const auto pi_ref = Policy(params.theta_ref, features);
  std::vector<double> rhos;
  double kl = 0.0;
  for (int a : group.actions) {
    rhos.push_back(Ratio(pi[a], pi_old[a]));
    kl += KlEstimate(pi_ref[a], pi[a]);
  }
  kl /= static_cast<double>(group.actions.size());
  return FinalLoss(LClip(rhos, group.advantages, config.eps_clip), kl, config.beta);
}

Weights PolicyGrad(const PolicyParams& params, std::span<const double> features,
                   const Group& group, const GrpoConfig& config) {
  CheckShapes(params, features);
  CheckGroup(group, params.theta.actions);
  const int num_actions = params.theta.actions;
  const auto pi = Policy(params.theta, features);
  const auto pi_old = Policy(params.theta_old, features);
  const auto pi_ref = Policy(params.theta_ref, features);
  const double n = static_cast<double>(group.actions.size());

  // d loss / d logit_c accumulates coef_i * (1[c = a_i] - pi_c), since
  // d log pi(a) / d logit_c = 1[c = a] - pi_c.
  std::vector<double> dlogits(num_actions, 0.0);
  for (std::size_t i = 0; i < group.actions.size(); ++i) {
    const int a = group.actions[i];
    const double adv = group.advantages[i];
    const double rho = Ratio(pi[a], pi_old[a]);
    CheckProbability(pi_ref[a], "reference policy");
    CheckProbability(pi[a], "current policy");
    const double clipped = std::clamp(rho, 1.0 - config.eps_clip, 1.0 + config.eps_clip);
    double coef = 0.0;
    if (rho * adv <= clipped * adv) coef -= adv * rho / n;
    const double r = pi_ref[a] / pi[a];
    coef -= config.beta * (r - 1.0) / n;
    for (int c = 0; c < num_actions; ++c) dlogits[c] += coef * ((c == a ? 1.0 : 0.0) - pi[c]);
  }
  Weights grad(params.theta.features, num_actions);
  for (int f = 0; f < grad.features; ++f) {
    for (int c = 0; c < num_actions; ++c) grad.at(f, c) = features[f] * dlogits[c];
  }
  return grad;
}

std::vector<double> StateFeatures(const QualityVector& qv) {
  std::vector<double> x = {1.0};
  for (std::string_view name : iqa::kMetricNames) x.push_back(qv.at(std::string(name)));
  return x;
}

BanditState FixtureState(const ImageBuf& img, const tools::ToolRegistry& registry,
                         const iqa::MetricBackend& metrics) {
  const QualityVector qv = metrics.Evaluate(img);
  const auto report = orchestrator::HeuristicPerceive(qv, {});
  BanditState state{StateFeatures(qv), std::vector<int>(kNumTasks, 0)};
  if (!report.recommended_next) return state;
  const RestorationTask task = *report.recommended_next;
  for (const ToolDescriptor& d : registry.descriptors()) {
    if (!d.supports(task)) continue;
    const QualityVector after = metrics.Evaluate(registry.Invoke(d.tool_id, img, task));
    state.rewards[TaskCode(task)] = orchestrator::ReferenceReward(qv, task, after, 0.0);
    break;
  }
  return state;
}

TrainResult TrainToyPolicy(const BanditEnv& env, const GrpoConfig& config, std::uint64_t seed) {
  ValidateConfig(config);
  if (env.states.empty()) throw Error(ErrorCode::kInvalidParam, "bandit has no states");
  const int num_features = static_cast<int>(env.states.front().features.size());
  for (const BanditState& s : env.states) {
    if (static_cast<int>(s.features.size()) != num_features ||
        static_cast<int>(s.rewards.size()) != env.actions) {
      throw Error(ErrorCode::kShapeMismatch, "bandit states differ in shape");
    }
  }
  TrainResult result;
  PolicyParams& p = result.params;
  p.theta = Weights(num_features, env.actions);
  p.theta_ref = p.theta;
  Rng rng(seed);
  const double num_states = static_cast<double>(env.states.size());

  for (int it = 0; it < config.iterations; ++it) {
    p.theta_old = p.theta;
    CurvePoint point;
    point.iteration = it;
    std::vector<Group> groups;
    for (const BanditState& s : env.states) {
      const auto pi = Policy(p.theta_old, s.features);
      Group g;
      std::vector<int> rewards;
      for (int i = 0; i < config.n; ++i) {
        g.actions.push_back(Sample(pi, rng));
        rewards.push_back(s.rewards[g.actions.back()]);
        point.mean_reward += rewards.back() / (config.n * num_states);
      }
      for (std::size_t a = 0; a < pi.size(); ++a) {
        point.expected_reward += pi[a] * s.rewards[a] / num_states;
      }
      g.advantages = Advantages(rewards, config.eps_num);
      point.loss += GroupLoss(p, s.features, g, config) / num_states;
      groups.push_back(std::move(g));
    }
    for (int step = 0; step < config.inner_steps; ++step) {
      Weights total(num_features, env.actions);
      for (std::size_t k = 0; k < groups.size(); ++k) {
        const Weights g = PolicyGrad(p, env.states[k].features, groups[k], config);
        for (std::size_t j = 0; j < total.values.size(); ++j) total.values[j] += g.values[j];
      }
      for (std::size_t j = 0; j < total.values.size(); ++j) {
        p.theta.values[j] -= config.learning_rate * total.values[j] / num_states;
      }
    }
    result.curve.push_back(point);
  }
  return result;
}

std::vector<double> MovingAverage(std::span<const double> values, int window) {
  if (window < 1) throw Error(ErrorCode::kInvalidParam, "window must be >= 1");
  std::vector<double> out;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) sum -= values[i - window];
    out.push_back(sum / static_cast<double>(std::min<std::size_t>(i + 1, window)));
  }
  return out;
}

}  // namespace restoragent::grpo
