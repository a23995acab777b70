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
#include <stdexcept>
#include <string>
#include <vector>

namespace swabbot {

class KeyValueConfig;

struct ForceKnot {
    double depth_mm = 0.0;
    double force_n = 0.0;
};

/// Turbinate contact bump: amplitude * exp(-(d - center)^2 / (2 width^2)).
struct ContactPeak {
    double center_mm = 0.0;
    double width_mm = 1.0;
    double amplitude_n = 0.0;
};

enum class Direction : std::uint8_t { Insert, Retract, Hold };

/// Depth-parameterized contact force of the swab against the nasal passage.
struct TissueProfile {
    std::string name = "custom";
    double passage_length_mm = 100.0;
    /// Piecewise-linear wall friction; must start at (0, 0).
    std::vector<ForceKnot> baseline;
    std::vector<ContactPeak> peaks;
    /// Retraction force multiplier.
    double friction_asymmetry = 1.0;
    double noise_sigma_n = 0.0;
    std::uint64_t seed = 0;
    /// Rigid end of the passage past `passage_length_mm`.
    double wall_stiffness_n_per_mm = 20.0;

    /// Throws std::invalid_argument naming the broken invariant.
    void validate() const;
};

/// Peaks fade in over this depth so the force is exactly zero at the nostril.
inline constexpr double kEntryRampMm = 2.0;

/// Noise-free force; `Hold` evaluates without the retraction multiplier.
double noiseless_force(const TissueProfile& profile, double depth_mm, Direction dir);

/// Force with per-sample Gaussian noise keyed on (profile.seed, sample_index).
/// Hold samples and samples outside the nostril carry no noise.
double contact_force(const TissueProfile& profile, double depth_mm, Direction dir, std::uint64_t sample_index);

/// Bench phantom: silicone passage, two turbinate contacts, no nasopharynx peak.
TissueProfile make_phantom_profile();

/// Pig-nose specimen; `seed` draws a specimen amplitude scale and the noise stream.
TissueProfile make_pig_profile(std::uint64_t seed);

/// Phantom with a synthetic nasopharynx end-peak, for safety testing only.
TissueProfile make_end_peak_profile();

/// Passage with a steep wall rising to `wall_force_n` at `wall_depth_mm`.
TissueProfile make_wall_profile(double wall_depth_mm, double wall_force_n);

/// Pig specimen amplitude scale used by make_pig_profile.
double pig_specimen_scale(std::uint64_t seed);

void write_profile(KeyValueConfig& cfg, const TissueProfile& profile);
/// Reads a profile from `tissue.*` keys.
TissueProfile profile_from_config(const KeyValueConfig& cfg);

}  // namespace swabbot
