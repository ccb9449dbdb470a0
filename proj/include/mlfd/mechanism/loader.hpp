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
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mlfd/mechanism/model.hpp"

namespace mlfd::mechanism {

/// Parses a mechanism document (JSON). Throws SchemaError for missing or
/// mistyped fields and InvariantViolation for inconsistent values.
MechanismModel load_mechanism(std::string_view document);
MechanismModel load_mechanism_json(const nlohmann::json& doc);
MechanismModel load_mechanism_file(const std::string& path);

nlohmann::json mechanism_to_json(const MechanismModel& model);

std::vector<std::string> bundled_mechanism_names();
/// Throws NotFound for unknown names.
MechanismModel bundled_mechanism(const std::string& name);
std::string bundled_mechanism_document(const std::string& name);

nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);

}  // namespace mlfd::mechanism
