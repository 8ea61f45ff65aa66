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

#ifndef RESTORAGENT_JSON_CODEC_H_
#define RESTORAGENT_JSON_CODEC_H_

#include "json.hpp"
#include "restoragent/bank.h"
#include "restoragent/types.h"

// nlohmann::json conversions for the wire and file formats.
namespace restoragent {

// Flat object {metric: value, ..., "aggregate": value}.
void to_json(nlohmann::json& j, const QualityVector& qv);
void from_json(const nlohmann::json& j, QualityVector& qv);

void to_json(nlohmann::json& j, const DegradationReport& r);
void to_json(nlohmann::json& j, const ExecutedStep& s);

namespace bank {
// Tasks serialize as their integer code.
void to_json(nlohmann::json& j, const Insight& in);
void from_json(const nlohmann::json& j, Insight& in);
}  // namespace bank

}  // namespace restoragent

#endif  // RESTORAGENT_JSON_CODEC_H_
