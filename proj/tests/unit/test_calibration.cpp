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
#include <limits>
#include <sstream>

#include "doctest.h"
#include "generators.hpp"
#include "swabbot/calibration.hpp"
#include "swabbot/config.hpp"

using namespace swabbot;

namespace {

// Beam stiff enough that 3.0 N stays inside the 0.50 mm linear band.
CalibrationRig quiet_rig(double h = 0.0) {
    CalibrationRig rig;
    rig.beam.stiffness_n_per_mm = 6.0;
    rig.sensor.noise_sigma_v = 0.0;
    rig.hysteresis_v = h;
    return rig;
}

}  // namespace

TEST_CASE("force grid") {
    const auto g = make_force_grid(3.0, 0.5);
    REQUIRE(g.size() == 7);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == doctest::Approx(3.0));
    CHECK(make_force_grid(2.5, 0.5).size() == 6);
    CHECK_THROWS(make_force_grid(1.0, 0.0));
}

TEST_CASE("no hysteresis: loading equals unloading") {
    const auto grid = make_force_grid(3.0, 0.5);
    const auto rec = acquire_record(quiet_rig(), grid);
    CHECK(rec.loading_v == rec.unloading_v);
}

TEST_CASE("hysteresis offsets interior points by 2h, closes at the ends") {
    const double h = 0.05;
    const auto grid = make_force_grid(3.0, 0.5);
    const auto rec = acquire_record(quiet_rig(h), grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double gap = rec.loading_v[i] - rec.unloading_v[i];
        if (i == 0 || i + 1 == grid.size()) {
            CHECK(gap == doctest::Approx(0.0));
        } else {
            CHECK(gap == doctest::Approx(2 * h));
        }
    }
}

TEST_CASE("exact recovery on a noiseless linear rig") {
    const auto grid = make_force_grid(3.0, 0.5);
    const auto rec = acquire_record(quiet_rig(), grid);
    const auto curve = fit_curve(rec);
    CHECK(curve.residual_mean_v < 1e-9);
    CHECK(curve.residual_std_v < 1e-9);
    const auto avg = rec.averaged_v();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(std::abs(force_from_voltage(curve, avg[i]).force_n - grid[i]) <= 1e-6);
    }
    CHECK(curve.v_min == avg.front());
    CHECK(curve.v_max == avg.back());
}

TEST_CASE("saturation during acquisition names the grid force") {
    CalibrationRig rig;  // default 5 N/mm: 3.0 N deflects 0.6 mm
    rig.sensor.noise_sigma_v = 0.0;
    try {
        acquire_record(rig, make_force_grid(3.0, 0.5));
        FAIL("expected CalibrationError");
    } catch (const CalibrationError& e) {
        REQUIRE(e.force_n().has_value());
        CHECK(*e.force_n() == doctest::Approx(3.0));
    }
}

TEST_CASE("rank-deficient and non-monotone fits are rejected") {
    CalibrationRecord flat;
    flat.grid_forces = {0.0, 1.0, 2.0};
    flat.loading_v = {1.0, 1.0, 1.0};
    flat.unloading_v = {1.0, 1.0, 1.0};
    CHECK_THROWS_AS(fit_curve(flat), CalibrationError);

    CalibrationRecord bent;
    bent.grid_forces = {0.0, 1.0, 2.0, 3.0};
    bent.loading_v = {0.0, 1.0, 1.05, 1.06};
    bent.unloading_v = bent.loading_v;
    CHECK_THROWS_AS(fit_curve(bent), CalibrationError);

    CalibrationRecord short_rec;
    short_rec.grid_forces = {0.0, 1.0};
    short_rec.loading_v = {0.3, 0.5};
    short_rec.unloading_v = {0.3, 0.5};
    CHECK_THROWS_AS(fit_curve(short_rec), CalibrationError);
}

TEST_CASE("readout clamps outside the calibrated range") {
    const auto curve = fit_curve(acquire_record(quiet_rig(), make_force_grid(3.0, 0.5)));
    const auto below = force_from_voltage(curve, curve.v_min - 0.2);
    CHECK(below.out_of_range);
    CHECK(below.force_n == doctest::Approx(0.0).epsilon(1e-9));
    const auto above = force_from_voltage(curve, curve.v_max + 1.0);
    CHECK(above.out_of_range);
    CHECK(above.force_n == doctest::Approx(3.0));
    CHECK(force_from_voltage(curve, std::numeric_limits<double>::quiet_NaN()).out_of_range);
    CHECK_FALSE(force_from_voltage(curve, 0.5 * (curve.v_min + curve.v_max)).out_of_range);
}

TEST_CASE("property: exact recovery over random noiseless affine rigs") {
    testing::Gen g(21);
    for (int i = 0; i < 500; ++i) {
        CalibrationRig rig;
        rig.beam.stiffness_n_per_mm = g.uniform(6.0, 12.0);
        rig.sensor.baseline_v = g.uniform(0.1, 0.6);
        rig.sensor.sensitivity_v_per_mm = g.uniform(2.0, 5.0);
        rig.sensor.noise_sigma_v = 0.0;
        const auto grid = make_force_grid(3.0, 0.5);
        const auto rec = acquire_record(rig, grid);
        const auto curve = fit_curve(rec);
        const auto avg = rec.averaged_v();
        for (std::size_t k = 0; k < grid.size(); ++k) {
            REQUIRE(std::abs(force_from_voltage(curve, avg[k]).force_n - grid[k]) <= 1e-6);
        }
    }
}

TEST_CASE("property: voltage residual stays within h + 10% for h in {0.02, 0.05, 0.1}") {
    testing::Gen g(22);
    for (double h : {0.02, 0.05, 0.1}) {
        for (int i = 0; i < 200; ++i) {
            auto rig = quiet_rig(h);
            rig.beam.stiffness_n_per_mm = g.uniform(6.0, 10.0);
            rig.sensor.sensitivity_v_per_mm = g.uniform(3.0, 5.0);
            const auto rec = acquire_record(rig, make_force_grid(3.0, 0.5));
            const auto curve = fit_curve(rec);
            for (double r : voltage_residuals(curve, rec)) REQUIRE(std::abs(r) <= 1.1 * h);
            REQUIRE(curve.residual_max_v <= 1.1 * h);
        }
    }
}

TEST_CASE("fitted curve increases over its valid range") {
    auto rig = quiet_rig(0.05);
    rig.sensor.noise_sigma_v = 0.01;
    const auto curve = fit_curve(acquire_record(rig, make_force_grid(3.0, 0.5)));
    double prev = -1.0;
    for (int i = 0; i <= 200; ++i) {
        const double v = curve.v_min + (curve.v_max - curve.v_min) * i / 200.0;
        const double f = curve.evaluate(v);
        CHECK(f > prev);
        prev = f;
    }
}

TEST_CASE("record and curve CSV round trip") {
    auto rig = quiet_rig(0.02);
    rig.sensor.noise_sigma_v = 0.01;
    const auto rec = acquire_record(rig, make_force_grid(3.0, 0.5), 1700000000);
    std::stringstream rs;
    write_record_csv(rs, rec);
    const auto rec2 = read_record_csv(rs);
    CHECK(rec2.timestamp == rec.timestamp);
    REQUIRE(rec2.grid_forces.size() == rec.grid_forces.size());
    for (std::size_t i = 0; i < rec.grid_forces.size(); ++i) {
        CHECK(rec2.loading_v[i] == doctest::Approx(rec.loading_v[i]).epsilon(1e-8));
        CHECK(rec2.unloading_v[i] == doctest::Approx(rec.unloading_v[i]).epsilon(1e-8));
    }

    const auto curve = fit_curve(rec);
    std::stringstream cs;
    write_curve_csv(cs, curve);
    const auto curve2 = read_curve_csv(cs);
    CHECK(curve2.c0 == doctest::Approx(curve.c0).epsilon(1e-8));
    CHECK(curve2.c1 == doctest::Approx(curve.c1).epsilon(1e-8));
    CHECK(curve2.c2 == doctest::Approx(curve.c2).epsilon(1e-8));
    CHECK(curve2.v_min == doctest::Approx(curve.v_min).epsilon(1e-8));
    CHECK(curve2.v_max == doctest::Approx(curve.v_max).epsilon(1e-8));

    std::stringstream broken("v,force_n\n1,2\n");
    CHECK_THROWS(read_curve_csv(broken));
}

TEST_CASE("invalid records are refused") {
    CalibrationRecord r;
    r.grid_forces = {0.0, 1.0, 0.5};
    r.loading_v = {0.3, 0.5, 0.6};
    r.unloading_v = {0.3, 0.5, 0.6};
    CHECK_THROWS_AS(r.validate(), CalibrationError);
    r.grid_forces = {0.0, 1.0, 2.0};
    r.loading_v = {0.3, 0.6, 0.5};
    CHECK_THROWS_AS(r.validate(), CalibrationError);
    r.loading_v = {0.3, 0.6};
    CHECK_THROWS_AS(r.validate(), CalibrationError);
}

TEST_CASE("calibration settings from config") {
    auto cfg = KeyValueConfig::parse("calibration.grid_max_n = 3.0\ncalibration.hysteresis_v = 0.05\n");
    const auto s = calibration_settings_from_config(cfg);
    CHECK(s.grid_max_n == 3.0);
    CHECK(s.hysteresis_v == 0.05);
    auto bad = KeyValueConfig::parse("calibration.grid_step_n = 0\n");
    try {
        calibration_settings_from_config(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.key() == "calibration.grid_step_n");
    }
}
