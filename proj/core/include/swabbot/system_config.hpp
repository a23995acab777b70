// Copyright 2026 The swabbot Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "swabbot/calibration.hpp"
#include "swabbot/gripper.hpp"
#include "swabbot/motion.hpp"
#include "swabbot/procedure.hpp"
#include "swabbot/tissue.hpp"

namespace swabbot {

class KeyValueConfig;

/// Everything the control stack reads from the key-value config file.
struct SystemConfig {
    BeamModel beam;
    OptoSensorModel sensor;
    CalibrationSettings calibration;
    MotionConfig motion;
    ProcedureConfig procedure;
    std::int64_t tick_ms = 20;
    std::int64_t telemetry_hz = 20;
    /// Set when the file carries `tissue.*` keys.
    std::optional<TissueProfile> tissue;
};

/// Parses every section and rejects unknown keys (ConfigError names the key).
SystemConfig system_config_from(const KeyValueConfig& cfg);
SystemConfig load_system_config(const std::filesystem::path& path);

}  // namespace swabbot
