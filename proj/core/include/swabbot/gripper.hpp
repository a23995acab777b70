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
#include <random>
#include <stdexcept>

namespace swabbot {

class KeyValueConfig;

/// Stiffness surrogate of the gripper's deflection beam.
///
/// Deflection is `x + nonlinearity * x^3` with `x = force / stiffness`,
/// clamped at the mechanical stop `max_deflection_mm`. The defaults put
/// 2.50 N at exactly 0.50 mm. Material data of the printed part
/// (E = 1.70 GPa, nu = 0.43) is kept for reference only.
struct BeamModel {
    double stiffness_n_per_mm = 5.0;
    double max_deflection_mm = 1.0;
    double nonlinearity_coeff = 0.0;

    static constexpr double kYoungsModulusGpa = 1.70;
    static constexpr double kPoissonRatio = 0.43;

    /// Throws std::invalid_argument when the parameters break monotonicity.
    void validate() const;
};

/// Reflective IR sensor, linear over the 0..0.50 mm band.
struct OptoSensorModel {
    static constexpr double kLinearRangeMm = 0.50;

    double baseline_v = 0.30;
    double sensitivity_v_per_mm = 4.0;
    double noise_sigma_v = 0.01;
    double supply_v = 3.3;

    void validate() const;
};

struct SensorReading {
    double volts = 0.0;
    /// Deflection was past the linear band; the value is the saturated endpoint.
    bool out_of_linear_range = false;
};

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Throws DomainError for negative or non-finite force.
double deflection_from_force(double force_n, const BeamModel& beam);

/// Noise-free sensor characteristic. Throws DomainError for negative deflection.
SensorReading voltage_from_deflection(double deflection_mm, const OptoSensorModel& sensor);

/// Full read path with Gaussian noise from a generator seeded with `seed`.
SensorReading simulate_raw_reading(double force_n, const BeamModel& beam, const OptoSensorModel& sensor,
                                   std::uint64_t seed);

/// Largest force that keeps the beam inside the sensor's linear band.
double force_at_linear_limit(const BeamModel& beam);

BeamModel beam_from_config(const KeyValueConfig& cfg);
OptoSensorModel sensor_from_config(const KeyValueConfig& cfg);

}  // namespace swabbot
