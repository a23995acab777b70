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
#include <stdexcept>

#include "doctest.h"
#include "generators.hpp"
#include "swabbot/config.hpp"
#include "swabbot/control_loop.hpp"
#include "swabbot/session.hpp"
#include "swabbot/tissue.hpp"

using namespace swabbot;

namespace {

RunSummary standard_run(const TissueProfile& profile, std::uint64_t seed) {
    const auto cfg = system_config_from(KeyValueConfig{});
    ControlLoop loop(cfg, profile, calibrate_from_config(cfg), seed);
    SessionRecorder session(loop);
    ScriptTransport transport(make_standard_script(cfg));
    run_session(session, transport);
    return summarize(session.rows());
}

double max_noiseless(const TissueProfile& p, double to_mm) {
    double m = 0.0;
    for (double d = 0.0; d <= to_mm; d += 0.01) {
        m = std::max({m, noiseless_force(p, d, Direction::Insert), noiseless_force(p, d, Direction::Retract)});
    }
    return m;
}

}  // namespace

TEST_CASE("zero force at the nostril and before it") {
    for (const auto& p : {make_phantom_profile(), make_pig_profile(1), make_end_peak_profile()}) {
        for (auto dir : {Direction::Insert, Direction::Retract, Direction::Hold}) {
            CHECK(noiseless_force(p, 0.0, dir) == 0.0);
            CHECK(contact_force(p, 0.0, dir, 17) == 0.0);
            CHECK(contact_force(p, -3.0, dir, 17) == 0.0);
        }
    }
}

TEST_CASE("property: continuous along depth") {
    // Peak slope is bounded by the steepest knot segment plus amplitude/width.
    for (const auto& p : {make_phantom_profile(), make_pig_profile(1), make_pig_profile(2), make_end_peak_profile()}) {
        double prev = noiseless_force(p, 0.0, Direction::Insert);
        for (double d = 0.01; d <= p.passage_length_mm; d += 0.01) {
            const double f = noiseless_force(p, d, Direction::Insert);
            REQUIRE(std::abs(f - prev) <= 0.02);
            prev = f;
        }
    }
}

TEST_CASE("property: non-negative and retraction scaled by the asymmetry") {
    testing::Gen g(41);
    const auto p = make_pig_profile(3);
    for (int i = 0; i < 10000; ++i) {
        const double d = g.uniform(-5.0, 120.0);
        const double in = noiseless_force(p, d, Direction::Insert);
        REQUIRE(in >= 0.0);
        REQUIRE(noiseless_force(p, d, Direction::Retract) == doctest::Approx(in * p.friction_asymmetry));
        REQUIRE(noiseless_force(p, d, Direction::Hold) == in);
        REQUIRE(contact_force(p, d, Direction::Insert, g.u32()) >= 0.0);
    }
}

TEST_CASE("noise is keyed on sample index; hold is noiseless") {
    const auto p = make_pig_profile(1);
    CHECK(contact_force(p, 30.0, Direction::Insert, 5) == contact_force(p, 30.0, Direction::Insert, 5));
    CHECK(contact_force(p, 30.0, Direction::Insert, 5) != contact_force(p, 30.0, Direction::Insert, 6));
    CHECK(contact_force(p, 30.0, Direction::Hold, 5) == noiseless_force(p, 30.0, Direction::Hold));
    auto other = p;
    other.seed = 2;
    CHECK(contact_force(p, 30.0, Direction::Insert, 5) != contact_force(other, 30.0, Direction::Insert, 5));
}

TEST_CASE("profile validation") {
    auto p = make_phantom_profile();
    p.baseline.front().force_n = 0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = make_phantom_profile();
    p.friction_asymmetry = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = make_phantom_profile();
    p.peaks.front().width_mm = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("serialization round trip") {
    for (const auto& p : {make_phantom_profile(), make_pig_profile(2), make_wall_profile(40.0, 4.0)}) {
        KeyValueConfig cfg;
        write_profile(cfg, p);
        const auto q = profile_from_config(KeyValueConfig::parse(cfg.to_string()));
        CHECK(q.name == p.name);
        CHECK(q.seed == p.seed);
        REQUIRE(q.baseline.size() == p.baseline.size());
        REQUIRE(q.peaks.size() == p.peaks.size());
        for (double d = 0.0; d <= p.passage_length_mm + 5.0; d += 0.25) {
            REQUIRE(noiseless_force(q, d, Direction::Retract) ==
                    doctest::Approx(noiseless_force(p, d, Direction::Retract)).epsilon(1e-9));
        }
    }
    auto bad = KeyValueConfig::parse("tissue.passage_length_mm = 90\ntissue.knot_count = 0\n");
    try {
        profile_from_config(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "tissue.knot_count");
    }
}

TEST_CASE("phantom is fixed; pig seeds draw distinct specimens") {
    const auto a = make_phantom_profile();
    const auto b = make_phantom_profile();
    for (double d = 0.0; d < 95.0; d += 1.0) CHECK(noiseless_force(a, d, Direction::Insert) == noiseless_force(b, d, Direction::Insert));
    CHECK(pig_specimen_scale(1) != pig_specimen_scale(2));
    CHECK(pig_specimen_scale(2) != pig_specimen_scale(3));
    testing::Gen g(42);
    for (int i = 0; i < 1000; ++i) {
        const double s = pig_specimen_scale(g.u32());
        REQUIRE(s >= 0.75);
        REQUIRE(s <= 1.15);
    }
}

TEST_CASE("the largest pig specimen stays under the payload") {
    auto p = make_pig_profile(1);
    const double s = pig_specimen_scale(1);
    for (auto& pk : p.peaks) pk.amplitude_n *= 1.15 / s;
    CHECK(max_noiseless(p, p.passage_length_mm) < 3.5);
}

TEST_CASE("phantom has no nasopharynx end peak") {
    const auto p = make_phantom_profile();
    const double near_end = max_noiseless(p, p.passage_length_mm) ;
    CHECK(noiseless_force(p, p.passage_length_mm - 4.0, Direction::Insert) <= near_end);
    for (const auto& pk : p.peaks) CHECK(pk.center_mm < p.passage_length_mm - 20.0);
    const auto e = make_end_peak_profile();
    CHECK(noiseless_force(e, e.passage_length_mm - 4.0, Direction::Insert) >
          noiseless_force(p, p.passage_length_mm - 4.0, Direction::Insert) + 2.0);
}

TEST_CASE("regression: standard scripted runs") {
    // Locked on the reference toolchain; the noise stream depends on the
    // standard library's normal_distribution.
    struct Expected {
        TissueProfile profile;
        std::uint64_t seed;
        double mean;
        double max;
    };
    const Expected cases[] = {
        {make_phantom_profile(), 1, 0.35002784297737533, 0.78422451973295471},
        {make_pig_profile(1), 1, 0.90651879877817387, 2.3478056797638236},
        {make_pig_profile(2), 2, 0.83686537536449801, 1.9905948013492039},
        {make_pig_profile(3), 3, 0.81209554776797965, 1.909438748612718},
    };
    for (const auto& c : cases) {
        const auto s = standard_run(c.profile, c.seed);
        CAPTURE(c.profile.name);
        CAPTURE(c.seed);
        CHECK(s.repetitions.size() == 3);
        CHECK(s.fault_ticks == 0);
        CHECK(std::abs(s.pooled.mean_n - c.mean) <= 1e-9);
        CHECK(std::abs(s.pooled.max_n - c.max) <= 1e-9);
    }
}

TEST_CASE("a 4 N wall pins the stage through the control loop") {
    // The sensor saturates at the working range, so the controller sees an
    // over-range reading while slip holds the stage at the wall.
    auto cfg = system_config_from(KeyValueConfig{});
    ControlLoop loop(cfg, make_wall_profile(40.0, 4.0), calibrate_from_config(cfg), 1);
    std::uint32_t seq = 0;
    auto send = [&](Command c) {
        c.seq = ++seq;
        return loop.tick(std::span<const Command>(&c, 1));
    };
    send(Command::simple(0, CommandKind::Arm));
    send(Command::press(0, Button::Start));
    TickReport r;
    for (int k = 0; k < 400; ++k) r = send(Command::jog(0, 0.0, 1.0));
    CHECK(r.row.safety != SafetyLevel::Ok);
    CHECK(r.plant_force_n >= 3.5);
    CHECK(loop.robot().linear.position < 40.0);
    CHECK(loop.robot().linear.position > 39.0);
    const double pinned = loop.robot().linear.position;
    for (int k = 0; k < 50; ++k) send(Command::jog(0, 0.0, 1.0));
    CHECK(loop.robot().linear.position <= pinned);
    for (int k = 0; k < 50; ++k) send(Command::jog(0, 0.0, -1.0));
    CHECK(loop.robot().linear.position < pinned - 1.0);
}
