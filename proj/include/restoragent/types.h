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

#ifndef RESTORAGENT_TYPES_H_
#define RESTORAGENT_TYPES_H_

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace restoragent {

// Integer codes are stable: they are what the bank and traces serialize.
enum class RestorationTask : int {
  kDenoise = 0,
  kDehaze = 1,
  kDerain = 2,
  kDeblur = 3,
  kDesnow = 4,
  kLowLightEnhance = 5,
  kCompositeEnhance = 6,
};

inline constexpr int kNumTasks = 7;

inline constexpr std::array<RestorationTask, kNumTasks> kAllTasks = {
    RestorationTask::kDenoise,         RestorationTask::kDehaze,
    RestorationTask::kDerain,          RestorationTask::kDeblur,
    RestorationTask::kDesnow,          RestorationTask::kLowLightEnhance,
    RestorationTask::kCompositeEnhance,
};

constexpr int TaskCode(RestorationTask t) { return static_cast<int>(t); }
RestorationTask TaskFromCode(int code);  // throws kInvalidParam
std::string_view TaskName(RestorationTask t);
RestorationTask TaskFromName(std::string_view name);  // throws kInvalidParam

// Named no-reference scores plus their oriented weighted sum.
struct QualityVector {
  std::map<std::string, double> scores;
  double aggregate = 0.0;

  double at(const std::string& name) const;
  friend bool operator==(const QualityVector&, const QualityVector&) = default;
};

struct Detection {
  RestorationTask task;
  double severity = 0.0;  // [0,1]
  std::string extent;
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct DegradationReport {
  std::vector<Detection> detections;
  std::string description;
  std::optional<RestorationTask> recommended_next;
  bool terminate = false;

  friend bool operator==(const DegradationReport&,
                         const DegradationReport&) = default;
};

// Sorts detections (severity desc, task code asc) and enforces
// terminate => no recommendation. Throws kInvalidParam on bad severities.
void NormalizeReport(DegradationReport& report);

enum class ToolMode { kBuiltin, kExternal };

struct ToolDescriptor {
  std::string tool_id;
  std::set<RestorationTask> supported_tasks;
  ToolMode mode = ToolMode::kBuiltin;
  std::optional<std::string> endpoint;
  std::map<std::string, std::string> params;

  bool supports(RestorationTask t) const { return supported_tasks.count(t) > 0; }
};

// Throws kInvalidParam when the descriptor breaks its invariants.
void ValidateDescriptor(const ToolDescriptor& d);

struct ExecutedStep {
  RestorationTask task;
  std::string tool_id;
  int reward = 0;
  QualityVector quality_before;
  QualityVector quality_after;
};

// Append-only record of one restoration session.
class ExecutionHistory {
 public:
  void append(ExecutedStep step) { steps_.push_back(std::move(step)); }
  void mark_skipped(RestorationTask t) { skipped_.push_back(t); }

  const std::vector<ExecutedStep>& steps() const { return steps_; }
  const std::vector<RestorationTask>& skipped() const { return skipped_; }
  bool empty() const { return steps_.empty(); }

  // True when `t` has a committed (reward 1) step.
  bool resolved(RestorationTask t) const;

 private:
  std::vector<ExecutedStep> steps_;
  std::vector<RestorationTask> skipped_;
};

}  // namespace restoragent

#endif  // RESTORAGENT_TYPES_H_
