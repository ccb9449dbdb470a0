// Copyright 2026 The mechanism-lfd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mlfd/demo/augment.hpp"
#include "mlfd/demo/segmentation.hpp"

namespace mlfd::demo {

HypothesisSource hypothesis_source_from_string(const std::string& s);
Verdict verdict_from_string(const std::string& s);

nlohmann::json segment_to_json(const Segment& s);
/// {"k": n, "segments": [...]}
nlohmann::json segmentation_summary(const std::vector<Segment>& segments);
nlohmann::json hypothesis_result_to_json(const ForceHypothesisResult& r);

nlohmann::json plan_to_json(const AugmentedPlan& plan);
/// Throws SchemaError on malformed input.
AugmentedPlan plan_from_json(const nlohmann::json& doc);
AugmentedPlan load_plan_file(const std::string& path);

}  // namespace mlfd::demo
