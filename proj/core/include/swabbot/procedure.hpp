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
#include <string_view>
#include <vector>

#include "swabbot/motion.hpp"

namespace swabbot {

class KeyValueConfig;

enum class Phase : std::uint8_t { Idle, AlignCheck, Inserting, Dwell, RotatingRetract, Complete, Fault };

inline constexpr Phase kAllPhases[] = {Phase::Idle,  Phase::AlignCheck,      Phase::Inserting, Phase::Dwell,
                                       Phase::RotatingRetract, Phase::Complete, Phase::Fault};

std::string_view to_string(Phase p);
std::optional<Phase> parse_phase(std::string_view s);

/// The sampling sequence plus the fault edges:
///   IDLE -> ALIGN_CHECK -> INSERTING -> DWELL -> ROTATING_RETRACT -> COMPLETE,
///   any -> FAULT, FAULT -> IDLE (reset), COMPLETE -> IDLE (reset, next procedure).
bool is_declared_transition(Phase from, Phase to);

/// Ordered; a status only moves up within a procedure.
enum class SafetyLevel : std::uint8_t { Ok, OverRange, AtPayload, Estop };

std::string_view to_string(SafetyLevel l);
std::optional<SafetyLevel> parse_safety_level(std::string_view s);

struct SafetyStatus {
    SafetyLevel level = SafetyLevel::Ok;
    bool latched = false;

    friend bool operator==(const SafetyStatus&, const SafetyStatus&) = default;
};

struct SafetyThresholds {
    double working_range_n = 2.5;  // sensing gripper working range
    double payload_n = 3.5;        // stage payload
};

/// Maps a force sample to a level and latches against `prior`.
SafetyStatus check_safety(double force_n, SafetyStatus prior, const SafetyThresholds& thresholds = {});

struct PoseConfig {
    double head_tilt_deg = 70.0;
    double insertion_angle_deg = 0.0;  // insertion axis relative to the palate
    double tolerance_deg = 5.0;
};

bool validate_pose(const PoseConfig& cfg);

enum class OperatorEvent : std::uint8_t { Arm, Start, DwellNow, Retract, Home, Reset, Estop };

struct ProcedureConfig {
    std::int64_t dwell_ms = 5000;
    double retract_speed_mm_s = 5.0;
    double retract_rotary_deg_s = 90.0;
    double home_threshold_mm = 1.0;
    /// 0 means the operator drives insertion and signals the dwell.
    double target_depth_mm = 0.0;
    double insert_speed_mm_s = 10.0;
    bool pose_override = false;
    PoseConfig pose;
    SafetyThresholds thresholds;
};

ProcedureConfig procedure_config_from_config(const KeyValueConfig& cfg);

struct ProcedureInput {
    std::int64_t clock_ms = 0;
    double force_n = 0.0;
    bool sensor_saturated = false;
    double linear_position_mm = 0.0;
    double linear_velocity_mm_s = 0.0;
    /// Operator jog demand, already dead-man filtered.
    AxisDemands operator_demand;
    /// A command arrived within the staleness window.
    bool operator_live = true;
    std::span<const OperatorEvent> events;
};

struct Transition {
    Phase from;
    Phase to;
    std::int64_t at_ms;
    std::string_view reason;
};

struct ProcedureOutput {
    Phase phase = Phase::Idle;
    SafetyStatus safety;
    AxisDemands demands;
    std::vector<Transition> transitions;
    std::vector<std::string> notices;
};

/// Phase sequencing and interlocks, evaluated once per control tick.
///
/// A force sample at or above the payload (or an ESTOP) zeroes every demand on
/// the tick it is observed and faults the procedure. Between the working range
/// and the payload, insertion is blocked and retraction still allowed.
/// After a RESET out of FAULT the controller sits in a recovery IDLE in which
/// high force only blocks insertion, so the operator can back the swab out.
class Procedure {
public:
    explicit Procedure(ProcedureConfig cfg = {});

    ProcedureOutput tick(const ProcedureInput& in);

    Phase phase() const { return phase_; }
    SafetyStatus safety() const { return safety_; }
    bool recovering() const { return recovering_; }
    const ProcedureConfig& config() const { return cfg_; }

private:
    void enter(Phase to, std::int64_t at_ms, std::string_view reason, ProcedureOutput& out);
    void handle_event(OperatorEvent ev, const ProcedureInput& in, ProcedureOutput& out);

    ProcedureConfig cfg_;
    Phase phase_ = Phase::Idle;
    SafetyStatus safety_;
    bool recovering_ = false;
    bool homing_ = false;
    bool dwell_skip_ = false;
    std::int64_t dwell_start_ms_ = 0;
};

}  // namespace swabbot
