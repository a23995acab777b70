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

#include "swabbot/tissue.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "swabbot/config.hpp"
#include "swabbot/seed.hpp"

namespace swabbot {
namespace {

double interpolate(const std::vector<ForceKnot>& knots, double depth) {
    if (knots.empty()) return 0.0;
    if (depth <= knots.front().depth_mm) return knots.front().force_n;
    if (depth >= knots.back().depth_mm) return knots.back().force_n;
    auto hi = std::upper_bound(knots.begin(), knots.end(), depth,
                               [](double d, const ForceKnot& k) { return d < k.depth_mm; });
    auto lo = hi - 1;
    const double t = (depth - lo->depth_mm) / (hi->depth_mm - lo->depth_mm);
    return lo->force_n + t * (hi->force_n - lo->force_n);
}

double passage_force(const TissueProfile& p, double depth) {
    double f = interpolate(p.baseline, depth);
    const double ramp = std::min(depth / kEntryRampMm, 1.0);
    for (const auto& pk : p.peaks) {
        const double z = (depth - pk.center_mm) / pk.width_mm;
        f += ramp * pk.amplitude_n * std::exp(-0.5 * z * z);
    }
    return f;
}

}  // namespace

void TissueProfile::validate() const {
    if (!(passage_length_mm > 0.0)) throw std::invalid_argument("passage_length must be positive");
    if (baseline.empty() || baseline.front().depth_mm != 0.0 || baseline.front().force_n != 0.0) {
        throw std::invalid_argument("baseline must start at (0 mm, 0 N)");
    }
    for (std::size_t i = 0; i < baseline.size(); ++i) {
        if (baseline[i].force_n < 0.0) throw std::invalid_argument("baseline forces must be >= 0");
        if (i > 0 && !(baseline[i].depth_mm > baseline[i - 1].depth_mm)) {
            throw std::invalid_argument("baseline knots must have strictly increasing depth");
        }
    }
    for (const auto& pk : peaks) {
        if (pk.amplitude_n < 0.0) throw std::invalid_argument("peak amplitudes must be >= 0");
        if (!(pk.width_mm > 0.0)) throw std::invalid_argument("peak widths must be positive");
    }
    if (!(friction_asymmetry > 0.0)) throw std::invalid_argument("friction_asymmetry must be positive");
    if (noise_sigma_n < 0.0) throw std::invalid_argument("noise_sigma must be >= 0");
    if (wall_stiffness_n_per_mm < 0.0) throw std::invalid_argument("wall_stiffness must be >= 0");
}

double noiseless_force(const TissueProfile& profile, double depth_mm, Direction dir) {
    if (!(depth_mm > 0.0)) return 0.0;
    double f = 0.0;
    if (depth_mm <= profile.passage_length_mm) {
        f = passage_force(profile, depth_mm);
    } else {
        f = passage_force(profile, profile.passage_length_mm) +
            profile.wall_stiffness_n_per_mm * (depth_mm - profile.passage_length_mm);
    }
    if (dir == Direction::Retract) f *= profile.friction_asymmetry;
    return std::max(f, 0.0);
}

double contact_force(const TissueProfile& profile, double depth_mm, Direction dir, std::uint64_t sample_index) {
    const double f = noiseless_force(profile, depth_mm, dir);
    if (dir == Direction::Hold || profile.noise_sigma_n <= 0.0 || !(depth_mm > 0.0)) return f;
    std::mt19937_64 rng(derive_seed(profile.seed, sample_index, 0x7155));
    std::normal_distribution<double> noise(0.0, profile.noise_sigma_n);
    return std::max(f + noise(rng), 0.0);
}

TissueProfile make_phantom_profile() {
    TissueProfile p;
    p.name = "phantom";
    p.passage_length_mm = 95.0;
    p.baseline = {{0.0, 0.0}, {6.0, 0.27}, {60.0, 0.378}, {95.0, 0.432}};
    p.peaks = {{32.0, 2.0, 0.34}, {55.0, 2.5, 0.3825}};
    p.friction_asymmetry = 0.85;
    p.noise_sigma_n = 0.02;
    p.seed = 1;
    return p;
}

double pig_specimen_scale(std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, 0x5ca1e));
    std::normal_distribution<double> dist(1.0, 0.2);
    for (;;) {
        const double s = dist(rng);
        if (s >= 0.75 && s <= 1.15) return s;
    }
}

TissueProfile make_pig_profile(std::uint64_t seed) {
    TissueProfile p;
    p.name = "pig";
    p.passage_length_mm = 90.0;
    const double scale = pig_specimen_scale(seed);
    p.baseline = {{0.0, 0.0}, {8.0, 0.375}, {50.0, 0.6875}, {90.0, 0.875}};
    p.peaks = {{25.0, 3.0, 1.08 * scale}, {48.0, 4.0, 1.44 * scale}, {66.0, 3.0, 0.81 * scale}};
    p.friction_asymmetry = 0.9;
    p.noise_sigma_n = 0.05;
    p.seed = seed;
    return p;
}

TissueProfile make_end_peak_profile() {
    TissueProfile p = make_phantom_profile();
    p.name = "end_peak";
    p.peaks.push_back({p.passage_length_mm - 4.0, 2.0, 3.0});
    return p;
}

TissueProfile make_wall_profile(double wall_depth_mm, double wall_force_n) {
    TissueProfile p;
    p.name = "wall";
    p.passage_length_mm = wall_depth_mm + 40.0;
    p.baseline = {{0.0, 0.0}, {wall_depth_mm - 1.0, 0.3}, {wall_depth_mm, wall_force_n},
                  {wall_depth_mm + 40.0, wall_force_n}};
    p.friction_asymmetry = 1.0;
    p.noise_sigma_n = 0.0;
    return p;
}

void write_profile(KeyValueConfig& cfg, const TissueProfile& p) {
    cfg.set("tissue.name", p.name);
    cfg.set("tissue.passage_length_mm", format_double(p.passage_length_mm));
    cfg.set("tissue.friction_asymmetry", format_double(p.friction_asymmetry));
    cfg.set("tissue.noise_sigma_n", format_double(p.noise_sigma_n));
    cfg.set("tissue.seed", std::to_string(p.seed));
    cfg.set("tissue.wall_stiffness_n_per_mm", format_double(p.wall_stiffness_n_per_mm));
    cfg.set("tissue.knot_count", std::to_string(p.baseline.size()));
    for (std::size_t i = 0; i < p.baseline.size(); ++i) {
        const auto prefix = "tissue.knot." + std::to_string(i);
        cfg.set(prefix + ".depth_mm", format_double(p.baseline[i].depth_mm));
        cfg.set(prefix + ".force_n", format_double(p.baseline[i].force_n));
    }
    cfg.set("tissue.peak_count", std::to_string(p.peaks.size()));
    for (std::size_t i = 0; i < p.peaks.size(); ++i) {
        const auto prefix = "tissue.peak." + std::to_string(i);
        cfg.set(prefix + ".center_mm", format_double(p.peaks[i].center_mm));
        cfg.set(prefix + ".width_mm", format_double(p.peaks[i].width_mm));
        cfg.set(prefix + ".amplitude_n", format_double(p.peaks[i].amplitude_n));
    }
}

TissueProfile profile_from_config(const KeyValueConfig& cfg) {
    auto need = [&](const std::string& key) {
        auto v = cfg.find_double(key);
        if (!v) throw ConfigError(key, "missing profile key '" + key + "'");
        return *v;
    };
    TissueProfile p;
    p.name = cfg.get_string("tissue.name", "custom");
    p.passage_length_mm = need("tissue.passage_length_mm");
    p.friction_asymmetry = cfg.get_double("tissue.friction_asymmetry", p.friction_asymmetry);
    p.noise_sigma_n = cfg.get_double("tissue.noise_sigma_n", p.noise_sigma_n);
    p.seed = static_cast<std::uint64_t>(cfg.get_int("tissue.seed", 0));
    p.wall_stiffness_n_per_mm = cfg.get_double("tissue.wall_stiffness_n_per_mm", p.wall_stiffness_n_per_mm);
    const auto knots = cfg.get_int("tissue.knot_count", 0);
    const auto peaks = cfg.get_int("tissue.peak_count", 0);
    if (knots < 1 || knots > 1000) throw ConfigError("tissue.knot_count", "tissue.knot_count must be in [1, 1000]");
    if (peaks < 0 || peaks > 1000) throw ConfigError("tissue.peak_count", "tissue.peak_count must be in [0, 1000]");
    for (std::int64_t i = 0; i < knots; ++i) {
        const auto prefix = "tissue.knot." + std::to_string(i);
        p.baseline.push_back({need(prefix + ".depth_mm"), need(prefix + ".force_n")});
    }
    for (std::int64_t i = 0; i < peaks; ++i) {
        const auto prefix = "tissue.peak." + std::to_string(i);
        p.peaks.push_back({need(prefix + ".center_mm"), need(prefix + ".width_mm"), need(prefix + ".amplitude_n")});
    }
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("tissue", std::string("invalid tissue profile: ") + e.what());
    }
    return p;
}

}  // namespace swabbot
