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
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swabbot/gripper.hpp"

namespace swabbot {

class KeyValueConfig;

class CalibrationError : public std::runtime_error {
public:
    explicit CalibrationError(const std::string& what, std::optional<double> force_n = std::nullopt)
        : std::runtime_error(what), force_n_(force_n) {}
    /// Grid force that caused the failure, when acquisition failed at a specific point.
    std::optional<double> force_n() const noexcept { return force_n_; }

private:
    std::optional<double> force_n_;
};

/// Simulated bench: the stage pushes the gripper through a rigid short swab
/// while a reference load cell reports the applied force.
///
/// Elastic hysteresis is a direction-dependent offset: loading reads `+h`,
/// unloading `-h`, and the two branches meet at the first and last grid point
/// where the stage turns around.
struct CalibrationRig {
    BeamModel beam;
    OptoSensorModel sensor;
    double hysteresis_v = 0.0;
    std::uint64_t seed = 0;
};

struct CalibrationRecord {
    std::vector<double> grid_forces;
    std::vector<double> loading_v;
    std::vector<double> unloading_v;
    std::int64_t timestamp = 0;

    /// Throws CalibrationError if the record breaks its shape/order invariants.
    void validate() const;
    std::vector<double> averaged_v() const;
};

/// force = c0 + c1 v + c2 v^2 over [v_min, v_max].
struct CalibrationCurve {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    /// Mean and sample std of |voltage residual| over every raw sample.
    double residual_mean_v = 0.0;
    double residual_std_v = 0.0;
    double residual_max_v = 0.0;
    double v_min = 0.0;
    double v_max = 0.0;

    double evaluate(double v) const { return c0 + (c1 + c2 * v) * v; }
    /// Voltage on the rising branch that maps to `force_n` (unclamped).
    double voltage_for(double force_n) const;
};

struct ForceReadout {
    double force_n = 0.0;
    /// Input voltage was outside the calibrated range and got clamped.
    bool out_of_range = false;
};

/// `0, step, 2*step, ...` up to and including `max_force` (within 1e-9).
std::vector<double> make_force_grid(double max_force_n, double step_n);

CalibrationRecord acquire_record(const CalibrationRig& rig, std::span<const double> grid, std::int64_t timestamp = 0);

CalibrationCurve fit_curve(const CalibrationRecord& record);

/// Per-sample voltage residuals (loading then unloading), signed.
std::vector<double> voltage_residuals(const CalibrationCurve& curve, const CalibrationRecord& record);

ForceReadout force_from_voltage(const CalibrationCurve& curve, double v);

void write_record_csv(std::ostream& out, const CalibrationRecord& record);
CalibrationRecord read_record_csv(std::istream& in);
void write_curve_csv(std::ostream& out, const CalibrationCurve& curve);
CalibrationCurve read_curve_csv(std::istream& in);

struct CalibrationSettings {
    double grid_max_n = 2.5;
    double grid_step_n = 0.5;
    double hysteresis_v = 0.0;
    std::uint64_t seed = 7;
};

CalibrationSettings calibration_settings_from_config(const KeyValueConfig& cfg);

}  // namespace swabbot
