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

namespace swabbot {

class KeyValueConfig;

struct AxisLimits {
    double min = 0.0;
    double max = 0.0;
    bool bounded = true;
    double max_speed = 0.0;  // units/s
    double max_accel = 0.0;  // units/s^2
};

struct MotionConfig {
    // Leadscrew stage, mm.
    AxisLimits linear{0.0, 120.0, true, 10.0, 50.0};
    // Geared rotation link, degrees; unbounded.
    AxisLimits rotary{0.0, 0.0, false, 180.0, 720.0};
    double payload_limit_n = 3.5;
    std::int64_t staleness_ms = 300;
};

MotionConfig motion_config_from_config(const KeyValueConfig& cfg);

struct AxisState {
    double position = 0.0;
    double velocity = 0.0;
};

struct RobotState {
    AxisState linear;
    AxisState rotary;
    /// Last linear step was eaten by the payload slip.
    bool slipping = false;
};

/// Rate demands; linear in mm/s, rotary in deg/s.
struct AxisDemands {
    double linear = 0.0;
    double rotary = 0.0;

    friend bool operator==(const AxisDemands&, const AxisDemands&) = default;
};

/// Operator stick sample. x drives rotation, y drives translation.
struct JogCommand {
    double x = 0.0;
    double y = 0.0;
    std::uint32_t seq = 0;
    std::int64_t issued_ms = 0;
    std::int64_t age_limit_ms = 300;
};

/// Scales the stick to axis rates; a command older than its age limit is zero demand.
AxisDemands mix_joystick(const JogCommand& cmd, std::int64_t now_ms, const MotionConfig& cfg);

/// Open-loop stepper slip: an insertion step at or above the payload limit is lost.
/// Retraction always goes through.
double apply_slip(double commanded_advance_mm, double contact_force_n, double payload_limit_n);

/// One control tick. Velocities slew toward the demands under the accel limit,
/// the linear axis brakes ahead of its travel limits, and the linear advance
/// goes through `apply_slip` with the current contact force.
///
/// `dt_s` outside (0, 0.05] is clamped; dt <= 0 leaves the state unchanged.
RobotState step_axes(const RobotState& state, const AxisDemands& demands, double contact_force_n, double dt_s,
                     const MotionConfig& cfg);

}  // namespace swabbot
