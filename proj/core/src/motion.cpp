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

#include "swabbot/motion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swabbot/config.hpp"

namespace swabbot {
namespace {

constexpr double kMaxDt = 0.05;
constexpr double kPinTolerance = 1e-9;

double clamp_unit(double v) { return std::isnan(v) ? 0.0 : std::clamp(v, -1.0, 1.0); }

// Largest speed toward a limit `remaining` away such that, after this tick,
// braking at `accel` still stops at or before the limit. `v0` is the current
// speed toward the limit (negative means moving away).
double braking_cap(double v0, double remaining, double accel, double dt) {
    remaining = std::max(remaining, 0.0);
    v0 = std::max(v0, 0.0);
    // Speeding up to v: travel = v*dt - (v - v0)^2 / 2a, plus v^2 / 2a to stop.
    const double accel_cap = (remaining + v0 * v0 / (2.0 * accel)) / (dt + v0 / accel);
    if (accel_cap >= v0) return accel_cap;
    // Slowing to v: travel = v*dt + (v0 - v)^2 / 2a, plus v^2 / 2a to stop.
    const double b = dt - v0 / accel;
    const double c = v0 * v0 / (2.0 * accel) - remaining;
    const double disc = b * b - 4.0 * c / accel;
    if (disc < 0.0) return 0.0;
    return std::max((-b + std::sqrt(disc)) * accel / 2.0, 0.0);
}

struct AxisStep {
    double velocity;
    double displacement;
};

// Velocity ramps toward `target` at the accel limit, then holds; the
// displacement is the exact integral over the tick.
AxisStep slew(double v0, double target, double accel, double dt) {
    const double dv = std::clamp(target - v0, -accel * dt, accel * dt);
    const double v1 = v0 + dv;
    const double ramp_time = std::abs(dv) / accel;
    return {v1, 0.5 * (v0 + v1) * ramp_time + v1 * (dt - ramp_time)};
}

double target_speed(double demand, const AxisLimits& lim) {
    return std::isnan(demand) ? 0.0 : std::clamp(demand, -lim.max_speed, lim.max_speed);
}

}  // namespace

AxisDemands mix_joystick(const JogCommand& cmd, std::int64_t now_ms, const MotionConfig& cfg) {
    if (now_ms - cmd.issued_ms > cmd.age_limit_ms) return {};
    return {clamp_unit(cmd.y) * cfg.linear.max_speed, clamp_unit(cmd.x) * cfg.rotary.max_speed};
}

double apply_slip(double commanded_advance_mm, double contact_force_n, double payload_limit_n) {
    if (commanded_advance_mm > 0.0 && contact_force_n >= payload_limit_n) return 0.0;
    return commanded_advance_mm;
}

RobotState step_axes(const RobotState& state, const AxisDemands& demands, double contact_force_n, double dt_s,
                     const MotionConfig& cfg) {
    if (!(dt_s > 0.0)) return state;
    const double dt = std::min(dt_s, kMaxDt);
    RobotState next = state;

    // Linear stage.
    const auto& lin = cfg.linear;
    double target = target_speed(demands.linear, lin);
    if (lin.bounded) {
        const double p = state.linear.position;
        const double v = state.linear.velocity;
        target = std::min(target, braking_cap(v, lin.max - p, lin.max_accel, dt));
        target = std::max(target, -braking_cap(-v, p - lin.min, lin.max_accel, dt));
    }
    const auto ls = slew(state.linear.velocity, target, lin.max_accel, dt);
    const double advance = apply_slip(ls.displacement, contact_force_n, cfg.payload_limit_n);
    next.slipping = advance != ls.displacement;
    next.linear.velocity = ls.velocity;
    next.linear.position = state.linear.position + advance;
    if (lin.bounded) {
        const bool near_max = next.linear.position >= lin.max - kPinTolerance;
        const bool near_min = next.linear.position <= lin.min + kPinTolerance;
        if (near_max && next.linear.velocity >= 0.0) {
            next.linear.position = lin.max;
            if (std::abs(next.linear.velocity) <= lin.max_accel * dt) next.linear.velocity = 0.0;
        } else if (near_min && next.linear.velocity <= 0.0) {
            next.linear.position = lin.min;
            if (std::abs(next.linear.velocity) <= lin.max_accel * dt) next.linear.velocity = 0.0;
        }
        next.linear.position = std::clamp(next.linear.position, lin.min, lin.max);
    }

    // Rotation link.
    const auto rs = slew(state.rotary.velocity, target_speed(demands.rotary, cfg.rotary), cfg.rotary.max_accel, dt);
    next.rotary.velocity = rs.velocity;
    next.rotary.position = state.rotary.position + rs.displacement;
    return next;
}

MotionConfig motion_config_from_config(const KeyValueConfig& cfg) {
    MotionConfig m;
    m.linear.min = cfg.get_double("motion.linear_min_mm", m.linear.min);
    m.linear.max = cfg.get_double("motion.linear_max_mm", m.linear.max);
    m.linear.max_speed = cfg.get_double("motion.linear_max_speed_mm_s", m.linear.max_speed);
    m.linear.max_accel = cfg.get_double("motion.linear_max_accel_mm_s2", m.linear.max_accel);
    m.rotary.max_speed = cfg.get_double("motion.rotary_max_speed_deg_s", m.rotary.max_speed);
    m.rotary.max_accel = cfg.get_double("motion.rotary_max_accel_deg_s2", m.rotary.max_accel);
    m.payload_limit_n = cfg.get_double("motion.payload_limit_n", m.payload_limit_n);
    m.staleness_ms = cfg.get_int("motion.staleness_ms", m.staleness_ms);

    auto require = [](bool ok, const char* key, const char* what) {
        if (!ok) throw ConfigError(key, std::string("invalid value for '") + key + "': " + what);
    };
    require(m.linear.max > m.linear.min, "motion.linear_max_mm", "must exceed motion.linear_min_mm");
    require(m.linear.max_speed > 0.0, "motion.linear_max_speed_mm_s", "must be positive");
    require(m.linear.max_accel > 0.0, "motion.linear_max_accel_mm_s2", "must be positive");
    require(m.rotary.max_speed > 0.0, "motion.rotary_max_speed_deg_s", "must be positive");
    require(m.rotary.max_accel > 0.0, "motion.rotary_max_accel_deg_s2", "must be positive");
    require(m.payload_limit_n > 0.0, "motion.payload_limit_n", "must be positive");
    require(m.staleness_ms > 0, "motion.staleness_ms", "must be positive");
    return m;
}

}  // namespace swabbot
