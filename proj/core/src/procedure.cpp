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

#include "swabbot/procedure.hpp"

#include <algorithm>
#include <cmath>

#include "swabbot/config.hpp"

namespace swabbot {

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::Idle: return "IDLE";
        case Phase::AlignCheck: return "ALIGN_CHECK";
        case Phase::Inserting: return "INSERTING";
        case Phase::Dwell: return "DWELL";
        case Phase::RotatingRetract: return "ROTATING_RETRACT";
        case Phase::Complete: return "COMPLETE";
        case Phase::Fault: return "FAULT";
    }
    return "?";
}

std::optional<Phase> parse_phase(std::string_view s) {
    for (Phase p : kAllPhases) {
        if (to_string(p) == s) return p;
    }
    return std::nullopt;
}

bool is_declared_transition(Phase from, Phase to) {
    if (to == Phase::Fault) return from != Phase::Fault;
    switch (from) {
        case Phase::Idle: return to == Phase::AlignCheck;
        case Phase::AlignCheck: return to == Phase::Inserting;
        case Phase::Inserting: return to == Phase::Dwell;
        case Phase::Dwell: return to == Phase::RotatingRetract;
        case Phase::RotatingRetract: return to == Phase::Complete;
        case Phase::Complete: return to == Phase::Idle;
        case Phase::Fault: return to == Phase::Idle;
    }
    return false;
}

std::string_view to_string(SafetyLevel l) {
    switch (l) {
        case SafetyLevel::Ok: return "OK";
        case SafetyLevel::OverRange: return "OVER_RANGE";
        case SafetyLevel::AtPayload: return "AT_PAYLOAD";
        case SafetyLevel::Estop: return "ESTOP";
    }
    return "?";
}

std::optional<SafetyLevel> parse_safety_level(std::string_view s) {
    for (auto l : {SafetyLevel::Ok, SafetyLevel::OverRange, SafetyLevel::AtPayload, SafetyLevel::Estop}) {
        if (to_string(l) == s) return l;
    }
    return std::nullopt;
}

namespace {

SafetyLevel level_for(double force_n, const SafetyThresholds& t) {
    if (force_n >= t.payload_n) return SafetyLevel::AtPayload;
    if (force_n > t.working_range_n) return SafetyLevel::OverRange;
    return SafetyLevel::Ok;
}

}  // namespace

SafetyStatus check_safety(double force_n, SafetyStatus prior, const SafetyThresholds& thresholds) {
    // NaN compares false everywhere; treat an unreadable sample as worst case short of ESTOP.
    const SafetyLevel now = std::isnan(force_n) ? SafetyLevel::AtPayload : level_for(force_n, thresholds);
    const SafetyLevel level = std::max(now, prior.level);
    return {level, level != SafetyLevel::Ok};
}

bool validate_pose(const PoseConfig& cfg) {
    return std::abs(cfg.insertion_angle_deg) <= cfg.tolerance_deg;
}

Procedure::Procedure(ProcedureConfig cfg) : cfg_(std::move(cfg)) {}

void Procedure::enter(Phase to, std::int64_t at_ms, std::string_view reason, ProcedureOutput& out) {
    out.transitions.push_back({phase_, to, at_ms, reason});
    phase_ = to;
    if (to == Phase::Dwell) {
        dwell_start_ms_ = at_ms;
        dwell_skip_ = false;
    }
    if (to != Phase::Idle) homing_ = false;
}

void Procedure::handle_event(OperatorEvent ev, const ProcedureInput& in, ProcedureOutput& out) {
    switch (ev) {
        case OperatorEvent::Estop:
            safety_ = {SafetyLevel::Estop, true};
            recovering_ = false;
            if (phase_ != Phase::Fault) enter(Phase::Fault, in.clock_ms, "estop", out);
            break;
        case OperatorEvent::Reset:
            if (phase_ == Phase::Fault) {
                enter(Phase::Idle, in.clock_ms, "operator reset", out);
                recovering_ = true;
                safety_ = {};
            } else if (phase_ == Phase::Complete) {
                enter(Phase::Idle, in.clock_ms, "next procedure", out);
                safety_ = {};
            } else if (phase_ == Phase::Idle) {
                safety_ = {};
            } else {
                out.notices.emplace_back("RESET ignored during an active procedure; use ESTOP to abort");
            }
            break;
        case OperatorEvent::Arm:
            if (phase_ != Phase::Idle) {
                out.notices.emplace_back("ARM ignored outside IDLE");
            } else if (recovering_ || safety_.level != SafetyLevel::Ok) {
                out.notices.emplace_back("ARM refused: safety status is not OK");
            } else if (validate_pose(cfg_.pose)) {
                enter(Phase::AlignCheck, in.clock_ms, "armed", out);
            } else if (cfg_.pose_override) {
                out.notices.emplace_back("pose outside tolerance; armed under operator override");
                enter(Phase::AlignCheck, in.clock_ms, "armed (pose override)", out);
            } else {
                out.notices.emplace_back("ARM refused: insertion axis not parallel to the palate within tolerance");
            }
            break;
        case OperatorEvent::Start:
            if (phase_ == Phase::AlignCheck) enter(Phase::Inserting, in.clock_ms, "start", out);
            break;
        case OperatorEvent::DwellNow:
            if (phase_ == Phase::Inserting) enter(Phase::Dwell, in.clock_ms, "operator dwell", out);
            break;
        case OperatorEvent::Retract:
            if (phase_ == Phase::Inserting) {
                enter(Phase::Dwell, in.clock_ms, "operator retract", out);
                dwell_skip_ = true;
            } else if (phase_ == Phase::Dwell && in.linear_velocity_mm_s <= 0.0) {
                enter(Phase::RotatingRetract, in.clock_ms, "operator retract", out);
            } else if (phase_ == Phase::Dwell) {
                dwell_skip_ = true;
            }
            break;
        case OperatorEvent::Home:
            if (phase_ == Phase::Idle) homing_ = true;
            break;
    }
}

ProcedureOutput Procedure::tick(const ProcedureInput& in) {
    ProcedureOutput out;
    for (auto ev : in.events) handle_event(ev, in, out);

    // Safety first: a payload-level sample preempts whatever the phase wanted.
    SafetyLevel sample = std::isnan(in.force_n) ? SafetyLevel::AtPayload : level_for(in.force_n, cfg_.thresholds);
    if (in.sensor_saturated) sample = std::max(sample, SafetyLevel::OverRange);

    bool insertion_blocked = false;
    if (phase_ == Phase::Fault) {
        // stays faulted until reset
    } else if (recovering_ && phase_ == Phase::Idle) {
        insertion_blocked = sample != SafetyLevel::Ok;
        safety_ = {sample, false};
        if (sample == SafetyLevel::Ok) recovering_ = false;
    } else {
        const auto level = std::max(sample, safety_.level);
        safety_ = {level, level != SafetyLevel::Ok};
        if (safety_.level >= SafetyLevel::AtPayload) {
            enter(Phase::Fault, in.clock_ms, "force at payload limit", out);
        }
        insertion_blocked = safety_.level != SafetyLevel::Ok;
    }

    AxisDemands d{};
    switch (phase_) {
        case Phase::Idle:
            d = in.operator_demand;
            if (d.linear != 0.0 || d.rotary != 0.0) homing_ = false;
            if (homing_) {
                if (in.linear_position_mm <= cfg_.home_threshold_mm) {
                    homing_ = false;
                    out.notices.emplace_back("homed");
                } else {
                    d = {-cfg_.retract_speed_mm_s, 0.0};
                }
            }
            break;
        case Phase::AlignCheck:
        case Phase::Complete:
        case Phase::Fault:
            break;
        case Phase::Inserting:
            if (cfg_.target_depth_mm > 0.0) {
                if (in.linear_position_mm >= cfg_.target_depth_mm) {
                    enter(Phase::Dwell, in.clock_ms, "target depth reached", out);
                } else if (in.operator_live) {
                    d = {cfg_.insert_speed_mm_s, in.operator_demand.rotary};
                }
            } else {
                d = in.operator_demand;
            }
            break;
        case Phase::Dwell:
            break;
        case Phase::RotatingRetract:
            break;
    }

    if (phase_ == Phase::Dwell) {
        d = {};
        const bool timer_done = in.clock_ms - dwell_start_ms_ >= cfg_.dwell_ms;
        const bool skip_ready = dwell_skip_ && in.clock_ms > dwell_start_ms_ && in.linear_velocity_mm_s <= 0.0;
        if (timer_done || skip_ready) enter(Phase::RotatingRetract, in.clock_ms, timer_done ? "dwell elapsed" : "operator retract", out);
    }
    if (phase_ == Phase::RotatingRetract) {
        if (in.linear_position_mm <= cfg_.home_threshold_mm) {
            enter(Phase::Complete, in.clock_ms, "retracted", out);
            d = {};
        } else {
            d = {-cfg_.retract_speed_mm_s, cfg_.retract_rotary_deg_s};
        }
    }

    if (insertion_blocked && d.linear > 0.0) d.linear = 0.0;
    if (phase_ == Phase::Fault) d = {};

    out.phase = phase_;
    out.safety = safety_;
    out.demands = d;
    return out;
}

ProcedureConfig procedure_config_from_config(const KeyValueConfig& cfg) {
    ProcedureConfig p;
    p.dwell_ms = cfg.get_int("procedure.dwell_ms", p.dwell_ms);
    p.retract_speed_mm_s = cfg.get_double("procedure.retract_speed_mm_s", p.retract_speed_mm_s);
    p.retract_rotary_deg_s = cfg.get_double("procedure.retract_rotary_rate_deg_s", p.retract_rotary_deg_s);
    p.home_threshold_mm = cfg.get_double("procedure.home_threshold_mm", p.home_threshold_mm);
    p.target_depth_mm = cfg.get_double("procedure.target_depth_mm", p.target_depth_mm);
    p.insert_speed_mm_s = cfg.get_double("procedure.insert_speed_mm_s", p.insert_speed_mm_s);
    p.pose_override = cfg.get_int("procedure.pose_override", 0) != 0;
    p.pose.head_tilt_deg = cfg.get_double("procedure.head_tilt_deg", p.pose.head_tilt_deg);
    p.pose.insertion_angle_deg = cfg.get_double("procedure.insertion_angle_deg", p.pose.insertion_angle_deg);
    p.pose.tolerance_deg = cfg.get_double("procedure.pose_tolerance_deg", p.pose.tolerance_deg);
    p.thresholds.working_range_n = cfg.get_double("procedure.working_range_n", p.thresholds.working_range_n);
    p.thresholds.payload_n = cfg.get_double("motion.payload_limit_n", p.thresholds.payload_n);

    auto require = [](bool ok, const char* key, const char* what) {
        if (!ok) throw ConfigError(key, std::string("invalid value for '") + key + "': " + what);
    };
    require(p.dwell_ms >= 0, "procedure.dwell_ms", "must be >= 0");
    require(p.retract_speed_mm_s > 0.0, "procedure.retract_speed_mm_s", "must be positive");
    require(p.retract_rotary_deg_s != 0.0, "procedure.retract_rotary_rate_deg_s", "must be nonzero");
    require(p.home_threshold_mm >= 0.0, "procedure.home_threshold_mm", "must be >= 0");
    require(p.target_depth_mm >= 0.0, "procedure.target_depth_mm", "must be >= 0");
    require(p.insert_speed_mm_s > 0.0, "procedure.insert_speed_mm_s", "must be positive");
    require(p.pose.tolerance_deg >= 0.0, "procedure.pose_tolerance_deg", "must be >= 0");
    require(p.thresholds.working_range_n > 0.0, "procedure.working_range_n", "must be positive");
    require(p.thresholds.payload_n > p.thresholds.working_range_n, "motion.payload_limit_n",
            "must exceed procedure.working_range_n");
    return p;
}

}  // namespace swabbot
