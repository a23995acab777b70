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

#include <benchmark/benchmark.h>

#include "swabbot/calibration.hpp"
#include "swabbot/config.hpp"
#include "swabbot/control_loop.hpp"
#include "swabbot/protocol.hpp"

using namespace swabbot;

static void BM_ControlTick(benchmark::State& state) {
    const auto cfg = system_config_from(KeyValueConfig{});
    ControlLoop loop(cfg, make_pig_profile(1), calibrate_from_config(cfg), 1);
    std::uint32_t seq = 0;
    for (auto c : {Command::simple(++seq, CommandKind::Arm), Command::press(++seq, Button::Start)}) {
        loop.tick(std::span<const Command>(&c, 1));
    }
    for (auto _ : state) {
        const auto c = Command::jog(++seq, 0.1, seq % 400 < 300 ? 1.0 : -1.0);
        benchmark::DoNotOptimize(loop.tick(std::span<const Command>(&c, 1)));
    }
}
BENCHMARK(BM_ControlTick);

static void BM_EncodeTelemetry(benchmark::State& state) {
    const Message m = TelemetryFrame{123456, 42.125, -1234.5, 0.4321, 2.1, Phase::Inserting, SafetyLevel::Ok, 77};
    for (auto _ : state) benchmark::DoNotOptimize(encode_message(m));
}
BENCHMARK(BM_EncodeTelemetry);

static void BM_DecodeJog(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(decode_message("CMD 7 JOG 0.5000 -1.0000\n"));
}
BENCHMARK(BM_DecodeJog);

static void BM_FitCurve(benchmark::State& state) {
    CalibrationRig rig;
    rig.beam.stiffness_n_per_mm = 6.0;
    rig.hysteresis_v = 0.05;
    const auto rec = acquire_record(rig, make_force_grid(3.0, 0.5));
    for (auto _ : state) benchmark::DoNotOptimize(fit_curve(rec));
}
BENCHMARK(BM_FitCurve);

BENCHMARK_MAIN();
