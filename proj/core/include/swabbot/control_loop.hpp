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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swabbot/calibration.hpp"
#include "swabbot/procedure.hpp"
#include "swabbot/protocol.hpp"
#include "swabbot/system_config.hpp"
#include "swabbot/tissue.hpp"

namespace swabbot {

/// One control tick as persisted to the trace.
struct TraceRow {
    std::int64_t t_ms = 0;
    double depth_mm = 0.0;
    double angle_deg = 0.0;
    double force_n = 0.0;  // calibrated readout
    double raw_v = 0.0;
    Phase phase = Phase::Idle;
    SafetyLevel safety = SafetyLevel::Ok;
};

struct TickReport {
    TraceRow row;
    double plant_force_n = 0.0;  // true contact force, not observable by the controller
    AxisDemands demands;
    RobotState robot_after;
    std::vector<Transition> transitions;
    std::vector<std::string> notices;
    std::optional<TelemetryFrame> telemetry;
    std::uint32_t discarded_commands = 0;
};

/// The single writer of robot and procedure state.
///
/// Each tick: apply the drained commands, sample the plant at the current
/// depth, run the sensor read path and the calibrated readout, evaluate the
/// procedure, and step the axes. Faults stop both axes outright (drivers
/// disabled) on the tick they latch.
class ControlLoop {
public:
    ControlLoop(SystemConfig cfg, TissueProfile profile, CalibrationCurve curve, std::uint64_t sensor_seed);

    TickReport tick(std::span<const Command> commands);

    /// Time of the next tick.
    std::int64_t now_ms() const { return tick_index_ * cfg_.tick_ms; }
    std::uint64_t tick_index() const { return tick_index_; }
    const RobotState& robot() const { return robot_; }
    const Procedure& procedure() const { return procedure_; }
    const SystemConfig& config() const { return cfg_; }
    const TissueProfile& profile() const { return profile_; }
    const CalibrationCurve& curve() const { return curve_; }
    std::uint32_t last_seq() const { return last_seq_; }
    ConfigEcho config_echo() const;

private:
    SystemConfig cfg_;
    TissueProfile profile_;
    CalibrationCurve curve_;
    std::uint64_t sensor_seed_;

    RobotState robot_;
    Procedure procedure_;
    std::optional<JogCommand> jog_;
    std::optional<std::int64_t> last_command_ms_;
    std::uint32_t last_seq_ = 0;
    bool any_seq_ = false;
    std::uint64_t tick_index_ = 0;
    std::int64_t next_frame_ = 0;
};

/// Runs the configured calibration on the simulated rig built from `cfg`.
CalibrationCurve calibrate_from_config(const SystemConfig& cfg, CalibrationRecord* record_out = nullptr);

}  // namespace swabbot
