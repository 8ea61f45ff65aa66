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

#ifndef RESTORAGENT_ORCHESTRATOR_H_
#define RESTORAGENT_ORCHESTRATOR_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "restoragent/bank.h"
#include "restoragent/image.h"
#include "restoragent/iqa.h"
#include "restoragent/retrieval.h"
#include "restoragent/tools.h"
#include "restoragent/types.h"

namespace restoragent::orchestrator {

enum class DecisionMode { kMultiStep, kOneStep };

std::string_view DecisionModeName(DecisionMode mode);
DecisionMode DecisionModeFromName(std::string_view name);  // throws kConfig

struct OrchestratorConfig {
  int max_steps = 5;
  int max_retries_per_step = 3;
  DecisionMode decision_mode = DecisionMode::kMultiStep;
  int k = retrieval::kDefaultTopK;
  double reward_delta = 0.0;
  bool evolution_enabled = true;
};

// Throws kConfig.
void ValidateConfig(const OrchestratorConfig& config);

struct PerceptionThresholds {
  double low_light_luminance = 0.25;  // detect below
  double haze_dark_channel = 0.35;    // detect above
  double noise_sigma = 0.02;          // detect above
  double blur_sharpness = 0.0005;     // detect below
};

class PerceptionBackend {
 public:
  virtual ~PerceptionBackend() = default;
  // recommended_next is set iff terminate is false.
  virtual DegradationReport Perceive(const ImageBuf& img, const QualityVector& qv,
                                     const ExecutionHistory& history) const = 0;
};

// Position of a task in the physical restoration order; lower runs first.
int TaskPriority(RestorationTask task);

// Threshold rules over the quality vector. Tasks resolved (reward 1) or
// skipped in `history` are suppressed.
DegradationReport HeuristicPerceive(const QualityVector& qv, const ExecutionHistory& history,
                                    const PerceptionThresholds& thresholds = {});

class HeuristicPerceiver final : public PerceptionBackend {
 public:
  explicit HeuristicPerceiver(PerceptionThresholds thresholds = {})
      : thresholds_(thresholds) {}
  DegradationReport Perceive(const ImageBuf& img, const QualityVector& qv,
                             const ExecutionHistory& history) const override;

 private:
  PerceptionThresholds thresholds_;
};

// Ablation: sees only the global luma mean and standard deviation of the
// image, never the quality vector. Bright flat images read as haze, high
// luma spread reads as noise, dark images read as low light.
class MomentPerceiver final : public PerceptionBackend {
 public:
  DegradationReport Perceive(const ImageBuf& img, const QualityVector& qv,
                             const ExecutionHistory& history) const override;
};

// Ablation: forwards to `inner` with an empty execution history.
class HistoryBlindPerceiver final : public PerceptionBackend {
 public:
  explicit HistoryBlindPerceiver(const PerceptionBackend& inner) : inner_(inner) {}
  DegradationReport Perceive(const ImageBuf& img, const QualityVector& qv,
                             const ExecutionHistory& history) const override;

 private:
  const PerceptionBackend& inner_;
};

struct RewardInput {
  const ImageBuf& before;
  const QualityVector& quality_before;
  RestorationTask task;
  const std::string& tool_id;
  const ImageBuf& after;
  const QualityVector& quality_after;
  const std::string& subjective_eval;
};

class RewardGenerator {
 public:
  virtual ~RewardGenerator() = default;
  // Returns 0 or 1.
  virtual int Reward(const RewardInput& input) const = 0;
};

// 1 iff the aggregate rises by more than delta and the task's signature
// metric improves (Dehaze: dark channel down; LowLightEnhance: luminance
// distance to 0.5 down; Denoise: noise down; Deblur: sharpness up; other
// tasks: aggregate only).
int ReferenceReward(const QualityVector& before, RestorationTask task,
                    const QualityVector& after, double delta);

class ReferenceRewardGenerator final : public RewardGenerator {
 public:
  explicit ReferenceRewardGenerator(double delta = 0.0) : delta_(delta) {}
  int Reward(const RewardInput& input) const override;

 private:
  double delta_;
};

// Deterministic textual assessment of one attempt, stored in the bank.
std::string SubjectiveEval(RestorationTask task, const std::string& tool_id,
                           const QualityVector& before, const QualityVector& after);

struct SessionDeps {
  const tools::ToolRegistry& registry;
  retrieval::KnowledgeBase& knowledge;
  const PerceptionBackend& perceiver;
  retrieval::SelectorBackend& selector;
  const RewardGenerator& reward;
  const iqa::MetricBackend& metrics;
  bank::InsightBank* bank = nullptr;            // appended to when evolution is on
  std::function<std::int64_t()> clock = nullptr;  // insight timestamps; 0 when unset
};

struct SessionResult {
  ImageBuf image;
  ExecutionHistory history;
  std::vector<bank::Insight> insights;  // one per attempt
  nlohmann::json trace;                 // free of timestamps
  int invocations = 0;
  int committed_steps = 0;
};

// MultiStep: perceive, select, invoke, reward; commit on 1, otherwise roll
// back, exclude the tool and retry, skipping the task once retries run out.
// OneStep: perceive once and run every detection in priority order with
// neither re-perception nor rollback. Tool invocations never exceed
// max_steps * (max_retries_per_step + 1).
SessionResult RunSession(const ImageBuf& input, const SessionDeps& deps,
                         const OrchestratorConfig& config);

}  // namespace restoragent::orchestrator

#endif  // RESTORAGENT_ORCHESTRATOR_H_
