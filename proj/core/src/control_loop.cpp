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

#include "swabbot/control_loop.hpp"

#include "swabbot/gripper.hpp"
#include "swabbot/seed.hpp"

namespace swabbot {
namespace {

constexpr double kMovingEpsilon = 1e-9;

Direction direction_of(double velocity) {
    if (velocity > kMovingEpsilon) return Direction::Insert;
    if (velocity < -kMovingEpsilon) return Direction::Retract;
    return Direction::Hold;
}

}  // namespace

ControlLoop::ControlLoop(SystemConfig cfg, TissueProfile profile, CalibrationCurve curve, std::uint64_t sensor_seed)
    : cfg_(std::move(cfg)),
      profile_(std::move(profile)),
      curve_(curve),
      sensor_seed_(sensor_seed),
      procedure_(cfg_.procedure) {
    profile_.validate();
}

ConfigEcho ControlLoop::config_echo() const {
    return {cfg_.procedure.thresholds.working_range_n, cfg_.procedure.thresholds.payload_n, cfg_.motion.staleness_ms,
            cfg_.telemetry_hz};
}

TickReport ControlLoop::tick(std::span<const Command> commands) {
    const std::int64_t now = now_ms();
    TickReport rep;

    std::vector<OperatorEvent> events;
    for (const auto& cmd : commands) {
        if (any_seq_ && cmd.seq <= last_seq_) {
            ++rep.discarded_commands;
            continue;
        }
        any_seq_ = true;
        last_seq_ = cmd.seq;
        last_command_ms_ = now;
        if (cmd.kind == CommandKind::Jog) {
            jog_ = JogCommand{cmd.x, cmd.y, cmd.seq, now, cfg_.motion.staleness_ms};
        } else if (auto ev = to_event(cmd)) {
            events.push_back(*ev);
        }
    }

    // Plant and sensing at the current depth.
    const double depth = robot_.linear.position;
    const double angle = robot_.rotary.position;
    const double plant_force = contact_force(profile_, depth, direction_of(robot_.linear.velocity), tick_index_);
    const auto reading = simulate_raw_reading(plant_force, cfg_.beam, cfg_.sensor, derive_seed(sensor_seed_, tick_index_));
    const auto readout = force_from_voltage(curve_, reading.volts);

    ProcedureInput in;
    in.clock_ms = now;
    in.force_n = readout.force_n;
    in.sensor_saturated = reading.out_of_linear_range;
    in.linear_position_mm = depth;
    in.linear_velocity_mm_s = robot_.linear.velocity;
    in.operator_demand = jog_ ? mix_joystick(*jog_, now, cfg_.motion) : AxisDemands{};
    in.operator_live = last_command_ms_ && now - *last_command_ms_ <= cfg_.motion.staleness_ms;
    in.events = events;
    auto out = procedure_.tick(in);

    const double dt = static_cast<double>(cfg_.tick_ms) / 1000.0;
    robot_ = step_axes(robot_, out.demands, plant_force, dt, cfg_.motion);
    if (out.phase == Phase::Fault) {
        robot_.linear.velocity = 0.0;
        robot_.rotary.velocity = 0.0;
    }

    rep.row = {now, depth, angle, readout.force_n, reading.volts, out.phase, out.safety.level};
    rep.plant_force_n = plant_force;
    rep.demands = out.demands;
    rep.robot_after = robot_;
    rep.transitions = std::move(out.transitions);
    rep.notices = std::move(out.notices);

    // Frame k is due at the first tick with t >= k * 1000 / hz.
    const std::int64_t frame_index = now * cfg_.telemetry_hz / 1000;
    if (frame_index >= next_frame_) {
        rep.telemetry = TelemetryFrame{now,           depth,     rep.row.angle_deg, readout.force_n,
                                       reading.volts, out.phase, out.safety.level,  last_seq_};
        next_frame_ = frame_index + 1;
    }

    ++tick_index_;
    return rep;
}

CalibrationCurve calibrate_from_config(const SystemConfig& cfg, CalibrationRecord* record_out) {
    CalibrationRig rig{cfg.beam, cfg.sensor, cfg.calibration.hysteresis_v, cfg.calibration.seed};
    const auto grid = make_force_grid(cfg.calibration.grid_max_n, cfg.calibration.grid_step_n);
    auto record = acquire_record(rig, grid);
    auto curve = fit_curve(record);
    if (record_out != nullptr) *record_out = std::move(record);
    return curve;
}

}  // namespace swabbot
