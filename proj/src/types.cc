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

#include "restoragent/types.h"

#include <algorithm>
#include <cmath>

#include "restoragent/error.h"

namespace restoragent {
namespace {

constexpr std::array<std::string_view, kNumTasks> kTaskNames = {
    "Denoise", "Dehaze", "Derain", "Deblur",
    "Desnow",  "LowLightEnhance", "CompositeEnhance",
};

}  // namespace

RestorationTask TaskFromCode(int code) {
  if (code < 0 || code >= kNumTasks) {
    throw Error(ErrorCode::kInvalidParam,
                "task code out of range: " + std::to_string(code));
  }
  return static_cast<RestorationTask>(code);
}

std::string_view TaskName(RestorationTask t) { return kTaskNames[TaskCode(t)]; }

RestorationTask TaskFromName(std::string_view name) {
  for (int i = 0; i < kNumTasks; ++i) {
    if (kTaskNames[i] == name) return static_cast<RestorationTask>(i);
  }
  throw Error(ErrorCode::kInvalidParam,
              "unknown task name: " + std::string(name));
}

double QualityVector::at(const std::string& name) const {
  auto it = scores.find(name);
  if (it == scores.end()) {
    throw Error(ErrorCode::kInvalidParam, "no score named " + name);
  }
  return it->second;
}

void NormalizeReport(DegradationReport& report) {
  for (const Detection& d : report.detections) {
    if (!std::isfinite(d.severity) || d.severity < 0.0 || d.severity > 1.0) {
      throw Error(ErrorCode::kInvalidParam, "severity outside [0,1]");
    }
  }
  std::stable_sort(report.detections.begin(), report.detections.end(),
                   [](const Detection& a, const Detection& b) {
                     if (a.severity != b.severity) return a.severity > b.severity;
                     return TaskCode(a.task) < TaskCode(b.task);
                   });
  if (report.terminate) report.recommended_next.reset();
}

void ValidateDescriptor(const ToolDescriptor& d) {
  if (d.tool_id.empty()) {
    throw Error(ErrorCode::kInvalidParam, "tool_id must be non-empty");
  }
  if (d.supported_tasks.empty()) {
    throw Error(ErrorCode::kInvalidParam,
                "tool " + d.tool_id + " supports no tasks");
  }
  if (d.mode == ToolMode::kExternal && (!d.endpoint || d.endpoint->empty())) {
    throw Error(ErrorCode::kInvalidParam,
                "external tool " + d.tool_id + " needs an endpoint");
  }
}

bool ExecutionHistory::resolved(RestorationTask t) const {
  return std::any_of(steps_.begin(), steps_.end(), [t](const ExecutedStep& s) {
    return s.task == t && s.reward == 1;
  });
}

}  // namespace restoragent
