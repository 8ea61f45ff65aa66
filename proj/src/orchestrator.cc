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

#include "restoragent/orchestrator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>

#include "restoragent/error.h"
#include "restoragent/filters.h"
#include "restoragent/json_codec.h"

namespace restoragent::orchestrator {
namespace {

using nlohmann::json;

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Severity-sorted report with the highest-priority detection recommended.
DegradationReport Finish(std::vector<Detection> detections) {
  DegradationReport report;
  report.detections = std::move(detections);
  report.terminate = report.detections.empty();
  if (!report.terminate) {
    report.recommended_next =
        std::min_element(report.detections.begin(), report.detections.end(),
                         [](const Detection& a, const Detection& b) {
                           return TaskPriority(a.task) < TaskPriority(b.task);
                         })
            ->task;
  }
  NormalizeReport(report);
  if (report.terminate) {
    report.description = "No degradation detected.";
  } else {
    std::string text;
    for (const Detection& d : report.detections) {
      if (!text.empty()) text += ' ';
      text += std::string(TaskName(d.task)) + " detected: " + d.extent + ", severity " +
              Fixed(d.severity, 2) + ".";
    }
    report.description = std::move(text);
  }
  return report;
}

bool Suppressed(const ExecutionHistory& history, RestorationTask task) {
  const auto& skipped = history.skipped();
  return history.resolved(task) ||
         std::find(skipped.begin(), skipped.end(), task) != skipped.end();
}

// Signature metric of a task and whether larger values are better.
std::optional<std::pair<std::string_view, bool>> Signature(RestorationTask task) {
  switch (task) {
    case RestorationTask::kDehaze:
      return std::pair{iqa::kDarkChannelDensity, false};
    case RestorationTask::kLowLightEnhance:
      return std::pair{iqa::kMeanLuminance, false};  // distance to 0.5
    case RestorationTask::kDenoise:
      return std::pair{iqa::kNoiseSigma, false};
    case RestorationTask::kDeblur:
      return std::pair{iqa::kSharpness, true};
    default:
      return std::nullopt;
  }
}

json ChunksJson(const std::vector<retrieval::RetrievedChunk>& chunks) {
  json out = json::array();
  for (const auto& c : chunks) {
    out.push_back({{"insight_id", c.id.insight_id},
                   {"ordinal", c.id.ordinal},
                   {"similarity", c.similarity},
                   {"tool_id", c.tool_id},
                   {"verdict", c.verdict}});
  }
  return out;
}

json ConfigJson(const OrchestratorConfig& c) {
  return {{"max_steps", c.max_steps},
          {"max_retries_per_step", c.max_retries_per_step},
          {"decision_mode", DecisionModeName(c.decision_mode)},
          {"k", c.k},
          {"reward_delta", c.reward_delta},
          {"evolution_enabled", c.evolution_enabled}};
}

class Session {
 public:
  Session(const ImageBuf& input, const SessionDeps& deps, const OrchestratorConfig& config)
      : deps_(deps), config_(config), current_(input) {
    next_local_id_ = deps.knowledge.max_insight_id() + 1;
    trace_ = {{"config", ConfigJson(config)}, {"events", json::array()}};
  }

  SessionResult Run() {
    if (config_.decision_mode == DecisionMode::kMultiStep) {
      RunMultiStep();
    } else {
      RunOneStep();
    }
    trace_["committed_steps"] = committed_;
    trace_["invocations"] = invocations_;
    trace_["final_quality"] = deps_.metrics.Evaluate(current_);
    return {current_, history_, insights_, trace_, invocations_, committed_};
  }

 private:
  struct Attempt {
    ImageBuf image;
    int reward = 0;
  };

  void RunMultiStep() {
    std::set<RestorationTask> initial;
    for (int step = 0;; ++step) {
      const QualityVector qv = deps_.metrics.Evaluate(current_);
      const DegradationReport report = deps_.perceiver.Perceive(current_, qv, history_);
      Event({{"type", "perceive"}, {"step", step}, {"quality", qv}, {"report", report}});
      if (step == 0) {
        for (const Detection& d : report.detections) initial.insert(d.task);
      }
      if (report.terminate) {
        Event({{"type", "terminate"}, {"reason", "no_detections"}});
        return;
      }
      if (step >= config_.max_steps) {
        Event({{"type", "terminate"}, {"reason", "max_steps"}});
        return;
      }
      const RestorationTask task = *report.recommended_next;
      const bool from_reperception = step > 0 && !initial.count(task);
      std::set<std::string> excluded;
      bool done = false;
      for (int attempt = 0; attempt <= config_.max_retries_per_step && !done; ++attempt) {
        std::optional<retrieval::Selection> selection = Select(report, task, excluded);
        if (!selection) break;
        const Attempt result = Execute(report, task, qv, *selection, step, from_reperception);
        if (result.reward == 1) {
          current_ = result.image;
          ++committed_;
          done = true;
        } else {
          excluded.insert(selection->tool_id);
        }
      }
      if (!done) {
        history_.mark_skipped(task);
        Event({{"type", "skip"}, {"step", step}, {"task", TaskName(task)}});
      }
    }
  }

  void RunOneStep() {
    const QualityVector qv0 = deps_.metrics.Evaluate(current_);
    const DegradationReport report = deps_.perceiver.Perceive(current_, qv0, history_);
    Event({{"type", "perceive"}, {"step", 0}, {"quality", qv0}, {"report", report}});
    std::vector<RestorationTask> plan;
    for (const Detection& d : report.detections) plan.push_back(d.task);
    std::stable_sort(plan.begin(), plan.end(), [](RestorationTask a, RestorationTask b) {
      return TaskPriority(a) < TaskPriority(b);
    });
    json plan_json = json::array();
    for (RestorationTask t : plan) plan_json.push_back(TaskName(t));
    Event({{"type", "plan"}, {"tasks", plan_json}});

    int step = 0;
    for (RestorationTask task : plan) {
      if (step >= config_.max_steps) break;
      const QualityVector qv = deps_.metrics.Evaluate(current_);
      std::optional<retrieval::Selection> selection = Select(report, task, {});
      if (selection) {
        current_ = Execute(report, task, qv, *selection, step, false).image;
        ++committed_;
      } else {
        history_.mark_skipped(task);
        Event({{"type", "skip"}, {"step", step}, {"task", TaskName(task)}});
      }
      ++step;
    }
    Event({{"type", "terminate"}, {"reason", "plan_complete"}});
  }

  std::optional<retrieval::Selection> Select(const DegradationReport& report,
                                             RestorationTask task,
                                             const std::set<std::string>& excluded) {
    const auto tools = deps_.registry.descriptors();
    try {
      return retrieval::SelectTool({report.description, task}, deps_.knowledge,
                                   deps_.selector, tools, excluded, config_.k);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoCandidateTool) throw;
      return std::nullopt;
    }
  }

  // One tool invocation; records history, insight and trace. The returned
  // image is the tool output, or the input when the tool failed.
  Attempt Execute(const DegradationReport& report, RestorationTask task,
                  const QualityVector& qv_before, const retrieval::Selection& selection,
                  int step, bool from_reperception) {
    ++invocations_;
    std::optional<std::string> tool_error;
    ImageBuf out = current_;
    try {
      out = deps_.registry.Invoke(selection.tool_id, current_, task);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kToolFailure && e.code() != ErrorCode::kShapeViolation) throw;
      tool_error = e.what();
    }
    const QualityVector qv_after = tool_error ? qv_before : deps_.metrics.Evaluate(out);
    const std::string eval =
        tool_error ? selection.tool_id + " on " + std::string(TaskName(task)) +
                         ": tool failed, image unchanged."
                   : SubjectiveEval(task, selection.tool_id, qv_before, qv_after);
    int reward = 0;
    if (!tool_error) {
      reward = deps_.reward.Reward(
          {current_, qv_before, task, selection.tool_id, out, qv_after, eval});
      if (reward != 0 && reward != 1) {
        throw Error(ErrorCode::kInvalidParam, "reward generator returned a non-binary value");
      }
    }
    history_.append({task, selection.tool_id, reward, qv_before, qv_after});
    RecordInsight(report, task, selection.tool_id, eval, reward,
                  qv_after.aggregate - qv_before.aggregate);

    json event = {{"type", "attempt"},
                  {"step", step},
                  {"task", TaskName(task)},
                  {"tool_id", selection.tool_id},
                  {"forced", selection.forced},
                  {"fell_back", selection.fell_back},
                  {"rationale", selection.rationale},
                  {"prompt", selection.prompt},
                  {"retrieved", ChunksJson(selection.retrieved)},
                  {"quality_before", qv_before},
                  {"quality_after", qv_after},
                  {"subjective_eval", eval},
                  {"reward", reward},
                  {"from_reperception", from_reperception}};
    if (tool_error) event["tool_error"] = *tool_error;
    Event(std::move(event));
    return {std::move(out), reward};
  }

  void RecordInsight(const DegradationReport& report, RestorationTask task,
                     const std::string& tool_id, const std::string& eval, int verdict,
                     double delta) {
    bank::Insight insight;
    insight.degradation_info = report.description;
    insight.tool_id = tool_id;
    insight.subjective_eval = eval;
    insight.verdict = verdict;
    insight.task = task;
    insight.timestamp = deps_.clock ? deps_.clock() : 0;
    insight.objective_delta = delta;
    if (config_.evolution_enabled && deps_.bank != nullptr) {
      insight.insight_id = deps_.bank->Append(insight);
    } else {
      insight.insight_id = next_local_id_;
    }
    next_local_id_ = insight.insight_id + 1;
    if (config_.evolution_enabled) deps_.knowledge.AddInsight(insight);
    insights_.push_back(std::move(insight));
  }

  void Event(json event) { trace_["events"].push_back(std::move(event)); }

  const SessionDeps& deps_;
  const OrchestratorConfig& config_;
  ImageBuf current_;
  ExecutionHistory history_;
  std::vector<bank::Insight> insights_;
  json trace_;
  int invocations_ = 0;
  int committed_ = 0;
  std::uint64_t next_local_id_ = 1;
};

}  // namespace

std::string_view DecisionModeName(DecisionMode mode) {
  return mode == DecisionMode::kMultiStep ? "multi-step" : "one-step";
}

DecisionMode DecisionModeFromName(std::string_view name) {
  if (name == "multi-step") return DecisionMode::kMultiStep;
  if (name == "one-step") return DecisionMode::kOneStep;
  throw Error(ErrorCode::kConfig, "decision mode must be multi-step or one-step, got " +
                                      std::string(name));
}

void ValidateConfig(const OrchestratorConfig& config) {
  if (config.max_steps < 1) throw Error(ErrorCode::kConfig, "max_steps must be >= 1");
  if (config.max_retries_per_step < 0) {
    throw Error(ErrorCode::kConfig, "max_retries_per_step must be >= 0");
  }
  if (config.k < 1) throw Error(ErrorCode::kConfig, "k must be >= 1");
  if (!std::isfinite(config.reward_delta) || config.reward_delta < 0.0) {
    throw Error(ErrorCode::kConfig, "reward_delta must be finite and >= 0");
  }
}

int TaskPriority(RestorationTask task) {
  switch (task) {
    case RestorationTask::kDerain:
    case RestorationTask::kDesnow:
      return 0;
    case RestorationTask::kDehaze:
      return 1;
    case RestorationTask::kDenoise:
      return 2;
    case RestorationTask::kLowLightEnhance:
      return 3;
    case RestorationTask::kDeblur:
      return 4;
    case RestorationTask::kCompositeEnhance:
      return 5;
  }
  return 6;
}

DegradationReport HeuristicPerceive(const QualityVector& qv, const ExecutionHistory& history,
                                    const PerceptionThresholds& th) {
  std::vector<Detection> detections;
  auto add = [&](RestorationTask task, double severity, std::string extent) {
    if (Suppressed(history, task)) return;
    detections.push_back({task, std::clamp(severity, 0.0, 1.0), std::move(extent)});
  };
  const double lum = qv.at(std::string(iqa::kMeanLuminance));
  const double dark = qv.at(std::string(iqa::kDarkChannelDensity));
  const double noise = qv.at(std::string(iqa::kNoiseSigma));
  const double sharp = qv.at(std::string(iqa::kSharpness));
  if (lum < th.low_light_luminance) {
    add(RestorationTask::kLowLightEnhance, 1.0 - lum / th.low_light_luminance,
        "global underexposure, mean luminance " + Fixed(lum));
  }
  if (dark > th.haze_dark_channel) {
    add(RestorationTask::kDehaze, (dark - th.haze_dark_channel) / (1.0 - th.haze_dark_channel),
        "global haze veil, dark channel density " + Fixed(dark));
  }
  if (noise > th.noise_sigma) {
    add(RestorationTask::kDenoise, (noise - th.noise_sigma) / 0.1,
        "sensor noise, estimated sigma " + Fixed(noise));
  }
  if (sharp < th.blur_sharpness) {
    add(RestorationTask::kDeblur, 1.0 - sharp / th.blur_sharpness,
        "soft detail, laplacian variance " + Fixed(sharp, 6));
  }
  return Finish(std::move(detections));
}

DegradationReport HeuristicPerceiver::Perceive(const ImageBuf&, const QualityVector& qv,
                                               const ExecutionHistory& history) const {
  return HeuristicPerceive(qv, history, thresholds_);
}

DegradationReport MomentPerceiver::Perceive(const ImageBuf& img, const QualityVector&,
                                            const ExecutionHistory& history) const {
  const std::vector<double> luma = Luma(img);
  const double mean = Mean(luma);
  const double spread = std::sqrt(Variance(luma));
  std::vector<Detection> detections;
  auto add = [&](RestorationTask task, double severity, std::string extent) {
    if (Suppressed(history, task)) return;
    detections.push_back({task, std::clamp(severity, 0.0, 1.0), std::move(extent)});
  };
  if (mean > 0.45 && spread < 0.12) {
    add(RestorationTask::kDehaze, 1.0 - spread / 0.12, "bright and flat, looks washed out");
  }
  if (spread > 0.2) add(RestorationTask::kDenoise, (spread - 0.2) / 0.3, "busy, looks grainy");
  if (mean < 0.25) add(RestorationTask::kLowLightEnhance, 1.0 - mean / 0.25, "looks dark");
  return Finish(std::move(detections));
}

DegradationReport HistoryBlindPerceiver::Perceive(const ImageBuf& img, const QualityVector& qv,
                                                  const ExecutionHistory&) const {
  return inner_.Perceive(img, qv, ExecutionHistory{});
}

int ReferenceReward(const QualityVector& before, RestorationTask task,
                    const QualityVector& after, double delta) {
  if (!(after.aggregate > before.aggregate + delta)) return 0;
  const auto sig = Signature(task);
  if (!sig) return 1;
  const std::string name(sig->first);
  double b = before.at(name), a = after.at(name);
  if (task == RestorationTask::kLowLightEnhance) {
    b = std::abs(b - 0.5);
    a = std::abs(a - 0.5);
  }
  return (sig->second ? a > b : a < b) ? 1 : 0;
}

int ReferenceRewardGenerator::Reward(const RewardInput& input) const {
  return ReferenceReward(input.quality_before, input.task, input.quality_after, delta_);
}

std::string SubjectiveEval(RestorationTask task, const std::string& tool_id,
                           const QualityVector& before, const QualityVector& after) {
  std::string text = tool_id + " on " + std::string(TaskName(task)) + ": ";
  bool improved = after.aggregate > before.aggregate;
  if (const auto sig = Signature(task)) {
    const std::string name(sig->first);
    const double b = before.at(name), a = after.at(name);
    text += name + " " + Fixed(b) + " -> " + Fixed(a) + ", ";
    const bool better = task == RestorationTask::kLowLightEnhance
                            ? std::abs(a - 0.5) < std::abs(b - 0.5)
                            : (sig->second ? a > b : a < b);
    improved = improved && better;
  }
  text += "aggregate " + Fixed(before.aggregate) + " -> " + Fixed(after.aggregate) + "; ";
  text += improved ? "the degradation was visibly reduced." : "the degradation was not resolved.";
  return text;
}

SessionResult RunSession(const ImageBuf& input, const SessionDeps& deps,
                         const OrchestratorConfig& config) {
  ValidateConfig(config);
  return Session(input, deps, config).Run();
}

}  // namespace restoragent::orchestrator
