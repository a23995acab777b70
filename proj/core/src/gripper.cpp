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

#include "swabbot/gripper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "swabbot/config.hpp"

namespace swabbot {

void BeamModel::validate() const {
    if (!(stiffness_n_per_mm > 0.0) || !std::isfinite(stiffness_n_per_mm)) {
        throw std::invalid_argument("beam stiffness must be positive");
    }
    if (!(max_deflection_mm > 0.0)) throw std::invalid_argument("beam max deflection must be positive");
    // A negative cubic term is fine as long as d(x) = x + c x^3 is still rising when it hits
    // the stop. Its turning point is at x = sqrt(-1 / 3c) with d = 2x/3.
    if (nonlinearity_coeff < 0.0) {
        const double x_turn = std::sqrt(-1.0 / (3.0 * nonlinearity_coeff));
        if (2.0 * x_turn / 3.0 <= max_deflection_mm) {
            throw std::invalid_argument("beam nonlinearity turns over before the mechanical stop");
        }
    }
}

void OptoSensorModel::validate() const {
    if (!(sensitivity_v_per_mm > 0.0)) throw std::invalid_argument("sensor sensitivity must be positive");
    if (!(supply_v > 0.0)) throw std::invalid_argument("sensor supply must be positive");
    if (baseline_v < 0.0 || baseline_v > supply_v) throw std::invalid_argument("sensor baseline outside supply rails");
    if (noise_sigma_v < 0.0) throw std::invalid_argument("sensor noise sigma must be non-negative");
}

double deflection_from_force(double force_n, const BeamModel& beam) {
    if (!(force_n >= 0.0) || !std::isfinite(force_n)) {
        throw DomainError("deflection_from_force: force must be a finite value >= 0, got " + std::to_string(force_n));
    }
    const double x = force_n / beam.stiffness_n_per_mm;
    const double d = x + beam.nonlinearity_coeff * x * x * x;
    return std::min(d, beam.max_deflection_mm);
}

SensorReading voltage_from_deflection(double deflection_mm, const OptoSensorModel& sensor) {
    if (!(deflection_mm >= 0.0)) {
        throw DomainError("voltage_from_deflection: deflection must be >= 0, got " + std::to_string(deflection_mm));
    }
    SensorReading out;
    double d = deflection_mm;
    if (d > OptoSensorModel::kLinearRangeMm) {
        d = OptoSensorModel::kLinearRangeMm;
        out.out_of_linear_range = true;
    }
    out.volts = std::clamp(sensor.baseline_v + sensor.sensitivity_v_per_mm * d, 0.0, sensor.supply_v);
    return out;
}

SensorReading simulate_raw_reading(double force_n, const BeamModel& beam, const OptoSensorModel& sensor,
                                   std::uint64_t seed) {
    auto reading = voltage_from_deflection(deflection_from_force(force_n, beam), sensor);
    if (sensor.noise_sigma_v > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, sensor.noise_sigma_v);
        reading.volts = std::clamp(reading.volts + noise(rng), 0.0, sensor.supply_v);
    }
    return reading;
}

double force_at_linear_limit(const BeamModel& beam) {
    // Solve x + c x^3 = L for x by Newton; the curve is monotone on the valid domain.
    const double target = std::min(OptoSensorModel::kLinearRangeMm, beam.max_deflection_mm);
    double x = target;
    for (int i = 0; i < 50; ++i) {
        const double f = x + beam.nonlinearity_coeff * x * x * x - target;
        const double df = 1.0 + 3.0 * beam.nonlinearity_coeff * x * x;
        const double step = f / df;
        x -= step;
        if (std::abs(step) < 1e-15) break;
    }
    return x * beam.stiffness_n_per_mm;
}

namespace {

void require(bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(key, std::string("invalid value for '") + key + "': " + what);
}

}  // namespace

BeamModel beam_from_config(const KeyValueConfig& cfg) {
    BeamModel beam;
    beam.stiffness_n_per_mm = cfg.get_double("beam.stiffness_n_per_mm", beam.stiffness_n_per_mm);
    beam.max_deflection_mm = cfg.get_double("beam.max_deflection_mm", beam.max_deflection_mm);
    beam.nonlinearity_coeff = cfg.get_double("beam.nonlinearity_coeff", beam.nonlinearity_coeff);
    require(beam.stiffness_n_per_mm > 0.0, "beam.stiffness_n_per_mm", "must be positive");
    require(beam.max_deflection_mm > 0.0, "beam.max_deflection_mm", "must be positive");
    try {
        beam.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("beam.nonlinearity_coeff", std::string("invalid value for 'beam.nonlinearity_coeff': ") +
                                                         e.what());
    }
    return beam;
}

OptoSensorModel sensor_from_config(const KeyValueConfig& cfg) {
    OptoSensorModel s;
    s.baseline_v = cfg.get_double("sensor.baseline_v", s.baseline_v);
    s.sensitivity_v_per_mm = cfg.get_double("sensor.sensitivity_v_per_mm", s.sensitivity_v_per_mm);
    s.noise_sigma_v = cfg.get_double("sensor.noise_sigma_v", s.noise_sigma_v);
    s.supply_v = cfg.get_double("sensor.supply_v", s.supply_v);
    require(s.sensitivity_v_per_mm > 0.0, "sensor.sensitivity_v_per_mm", "must be positive");
    require(s.supply_v > 0.0, "sensor.supply_v", "must be positive");
    require(s.baseline_v >= 0.0 && s.baseline_v <= s.supply_v, "sensor.baseline_v", "must lie within the supply rails");
    require(s.noise_sigma_v >= 0.0, "sensor.noise_sigma_v", "must be non-negative");
    return s;
}

}  // namespace swabbot
