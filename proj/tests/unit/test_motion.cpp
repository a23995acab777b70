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

#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "swabbot/config.hpp"
#include "swabbot/motion.hpp"

using namespace swabbot;

TEST_CASE("joystick mixing") {
    MotionConfig cfg;
    const JogCommand diag{1.0, 1.0, 1, 0, 300};
    const auto d = mix_joystick(diag, 0, cfg);
    CHECK(d.linear == cfg.linear.max_speed);
    CHECK(d.rotary == cfg.rotary.max_speed);

    const JogCommand half{-0.5, 0.25, 2, 0, 300};
    CHECK(mix_joystick(half, 100, cfg) == AxisDemands{0.25 * 10.0, -0.5 * 180.0});

    const JogCommand wild{7.0, -9.0, 3, 0, 300};
    CHECK(mix_joystick(wild, 0, cfg) == AxisDemands{-10.0, 180.0});

    CHECK(mix_joystick(diag, 300, cfg) == d);
    CHECK(mix_joystick(diag, 301, cfg) == AxisDemands{});
}

TEST_CASE("slip") {
    CHECK(apply_slip(0.2, 3.49, 3.5) == 0.2);
    CHECK(apply_slip(0.2, 3.5, 3.5) == 0.0);
    CHECK(apply_slip(0.2, 4.0, 3.5) == 0.0);
    CHECK(apply_slip(-0.2, 4.0, 3.5) == -0.2);
    CHECK(apply_slip(0.0, 9.0, 3.5) == 0.0);
}

TEST_CASE("trapezoid from rest matches the closed form") {
    MotionConfig cfg;
    const double v = cfg.linear.max_speed;
    const double a = cfg.linear.max_accel;
    const double dt = 0.02;
    RobotState s;
    const AxisDemands go{v, 0.0};
    for (int k = 1; k <= 200; ++k) {
        s = step_axes(s, go, 0.0, dt, cfg);
        const double t = k * dt;
        const double expected = t < v / a ? 0.5 * a * t * t : v * t - v * v / (2.0 * a);
        REQUIRE(std::abs(s.linear.position - expected) <= 1e-6);
    }
    // Release: stops after v^2/2a more travel.
    const double at_release = s.linear.position;
    for (int k = 0; k < 50; ++k) s = step_axes(s, {}, 0.0, dt, cfg);
    CHECK(s.linear.velocity == 0.0);
    CHECK(s.linear.position - at_release == doctest::Approx(v * v / (2.0 * a)).epsilon(1e-9));
}

TEST_CASE("rotary axis is unbounded") {
    MotionConfig cfg;
    RobotState s;
    for (int k = 0; k < 500; ++k) s = step_axes(s, {0.0, 180.0}, 0.0, 0.02, cfg);
    CHECK(s.rotary.position > 1000.0);
    CHECK(s.rotary.velocity == 180.0);
}

TEST_CASE("braking ahead of the travel limit") {
    MotionConfig cfg;
    RobotState s;
    s.linear.position = cfg.linear.max - 1.5;  // just outside v^2/2a
    s.linear.velocity = cfg.linear.max_speed;
    double prev_v = s.linear.velocity;
    for (int k = 0; k < 100; ++k) {
        s = step_axes(s, {cfg.linear.max_speed, 0.0}, 0.0, 0.02, cfg);
        REQUIRE(s.linear.position <= cfg.linear.max);
        REQUIRE(std::abs(s.linear.velocity - prev_v) <= cfg.linear.max_accel * 0.02 + 1e-9);
        prev_v = s.linear.velocity;
    }
    CHECK(s.linear.position == cfg.linear.max);
    CHECK(s.linear.velocity == 0.0);
}

TEST_CASE("dt handling") {
    MotionConfig cfg;
    RobotState s;
    s.linear.velocity = 5.0;
    CHECK(step_axes(s, {10.0, 0.0}, 0.0, 0.0, cfg).linear.position == 0.0);
    CHECK(step_axes(s, {10.0, 0.0}, 0.0, -1.0, cfg).linear.velocity == 5.0);
    const auto big = step_axes(s, {10.0, 0.0}, 0.0, 10.0, cfg);
    const auto capped = step_axes(s, {10.0, 0.0}, 0.0, 0.05, cfg);
    CHECK(big.linear.position == capped.linear.position);
}

TEST_CASE("NaN demand is treated as zero") {
    MotionConfig cfg;
    RobotState s;
    s = step_axes(s, {std::nan(""), std::nan("")}, 0.0, 0.02, cfg);
    CHECK(s.linear.velocity == 0.0);
    CHECK(s.rotary.velocity == 0.0);
}

TEST_CASE("property: 1e4 random ticks keep limits, speed and accel bounds") {
    testing::Gen g(31);
    MotionConfig cfg;
    const double eps = 1e-9;
    for (int run = 0; run < 20; ++run) {
        RobotState s;
        s.linear.position = g.uniform(cfg.linear.min, cfg.linear.max);
        for (int k = 0; k < 500; ++k) {  // 20 x 500 ticks
            const double dt = g.coin(0.9) ? 0.02 : g.uniform(0.001, 0.08);
            const AxisDemands d{g.uniform(-30.0, 30.0), g.uniform(-500.0, 500.0)};
            const double force = g.coin(0.1) ? g.uniform(3.0, 5.0) : g.uniform(0.0, 1.0);
            const auto n = step_axes(s, d, force, dt, cfg);
            const double h = std::min(dt, 0.05);
            REQUIRE(n.linear.position >= cfg.linear.min);
            REQUIRE(n.linear.position <= cfg.linear.max);
            REQUIRE(std::abs(n.linear.velocity) <= cfg.linear.max_speed + eps);
            REQUIRE(std::abs(n.rotary.velocity) <= cfg.rotary.max_speed + eps);
            REQUIRE(std::abs(n.linear.velocity - s.linear.velocity) <= cfg.linear.max_accel * h + eps);
            REQUIRE(std::abs(n.rotary.velocity - s.rotary.velocity) <= cfg.rotary.max_accel * h + eps);
            if (force >= cfg.payload_limit_n) REQUIRE(n.linear.position <= s.linear.position);
            s = n;
        }
    }
}

TEST_CASE("property: identical inputs give identical trajectories") {
    MotionConfig cfg;
    auto run = [&] {
        testing::Gen g(32);
        RobotState s;
        for (int k = 0; k < 2000; ++k) s = step_axes(s, {g.uniform(-10, 10), g.uniform(-180, 180)}, 0.0, 0.02, cfg);
        return s;
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.linear.position == b.linear.position);
    CHECK(a.rotary.position == b.rotary.position);
}

TEST_CASE("slip pins the stage against a wall at or above the payload") {
    MotionConfig cfg;
    RobotState s;
    const double wall = 40.0;
    auto wall_force = [&](double d) { return d < wall ? 0.3 : 4.0; };
    for (int k = 0; k < 1000; ++k) s = step_axes(s, {cfg.linear.max_speed, 0.0}, wall_force(s.linear.position), 0.02, cfg);
    CHECK(s.linear.position >= wall);
    CHECK(s.linear.position < wall + cfg.linear.max_speed * 0.02);
    CHECK(s.slipping);
    // Retraction is never eaten.
    const double pinned = s.linear.position;
    for (int k = 0; k < 50; ++k) s = step_axes(s, {-cfg.linear.max_speed, 0.0}, wall_force(s.linear.position), 0.02, cfg);
    CHECK(s.linear.position < pinned);
}

TEST_CASE("motion config keys") {
    auto cfg = KeyValueConfig::parse("motion.linear_max_mm = 80\nmotion.staleness_ms = 250\n");
    const auto m = motion_config_from_config(cfg);
    CHECK(m.linear.max == 80.0);
    CHECK(m.staleness_ms == 250);
    auto bad = KeyValueConfig::parse("motion.linear_max_accel_mm_s2 = 0\n");
    try {
        motion_config_from_config(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "motion.linear_max_accel_mm_s2");
    }
}
