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

#include "swabbot/system_config.hpp"

#include "swabbot/config.hpp"

namespace swabbot {

SystemConfig system_config_from(const KeyValueConfig& cfg) {
    SystemConfig s;
    s.beam = beam_from_config(cfg);
    s.sensor = sensor_from_config(cfg);
    s.calibration = calibration_settings_from_config(cfg);
    s.motion = motion_config_from_config(cfg);
    s.procedure = procedure_config_from_config(cfg);
    s.tick_ms = cfg.get_int("session.tick_ms", s.tick_ms);
    s.telemetry_hz = cfg.get_int("session.telemetry_hz", s.telemetry_hz);
    if (s.tick_ms <= 0 || s.tick_ms > 50) throw ConfigError("session.tick_ms", "session.tick_ms must be in [1, 50]");
    if (s.telemetry_hz <= 0 || s.telemetry_hz > 1000 / s.tick_ms) {
        throw ConfigError("session.telemetry_hz", "session.telemetry_hz must be in [1, tick rate]");
    }
    if (cfg.contains("tissue.passage_length_mm")) s.tissue = profile_from_config(cfg);
    cfg.reject_unconsumed();
    return s;
}

SystemConfig load_system_config(const std::filesystem::path& path) {
    return system_config_from(KeyValueConfig::load(path));
}

}  // namespace swabbot
