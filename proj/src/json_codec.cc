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

#include "restoragent/json_codec.h"

#include "restoragent/error.h"

namespace restoragent {

using nlohmann::json;

void to_json(json& j, const QualityVector& qv) {
  j = json::object();
  for (const auto& [name, v] : qv.scores) j[name] = v;
  j["aggregate"] = qv.aggregate;
}

void from_json(const json& j, QualityVector& qv) {
  qv = {};
  for (const auto& [key, value] : j.items()) {
    if (key == "aggregate") {
      qv.aggregate = value.get<double>();
    } else {
      qv.scores[key] = value.get<double>();
    }
  }
}

void to_json(json& j, const DegradationReport& r) {
  json detections = json::array();
  for (const Detection& d : r.detections) {
    detections.push_back({{"task", TaskName(d.task)},
                          {"severity", d.severity},
                          {"extent", d.extent}});
  }
  j = {{"detections", std::move(detections)},
       {"description", r.description},
       {"terminate", r.terminate}};
  j["recommended_next"] =
      r.recommended_next ? json(TaskName(*r.recommended_next)) : json(nullptr);
}

void to_json(json& j, const ExecutedStep& s) {
  j = {{"task", TaskName(s.task)},
       {"tool_id", s.tool_id},
       {"reward", s.reward},
       {"quality_before", s.quality_before},
       {"quality_after", s.quality_after}};
}

namespace bank {

void to_json(json& j, const Insight& in) {
  j = {{"insight_id", in.insight_id},
       {"degradation_info", in.degradation_info},
       {"tool_id", in.tool_id},
       {"subjective_eval", in.subjective_eval},
       {"verdict", in.verdict},
       {"task", TaskCode(in.task)},
       {"timestamp", in.timestamp},
       {"objective_delta", in.objective_delta}};
}

void from_json(const json& j, Insight& in) {
  in = {};
  in.insight_id = j.value("insight_id", std::uint64_t{0});
  in.degradation_info = j.at("degradation_info").get<std::string>();
  in.tool_id = j.at("tool_id").get<std::string>();
  in.subjective_eval = j.value("subjective_eval", std::string());
  in.verdict = j.at("verdict").get<int>();
  const json& task = j.at("task");
  in.task = task.is_string() ? TaskFromName(task.get<std::string>())
                             : TaskFromCode(task.get<int>());
  in.timestamp = j.value("timestamp", std::int64_t{0});
  in.objective_delta = j.value("objective_delta", 0.0);
}

}  // namespace bank
}  // namespace restoragent
