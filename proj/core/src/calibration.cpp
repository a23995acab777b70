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

#include "swabbot/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "swabbot/config.hpp"
#include "swabbot/seed.hpp"

namespace swabbot {
namespace {

std::string sig9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

double parse_number(std::string_view s, std::size_t row, const char* what) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw CalibrationError("row " + std::to_string(row) + ": bad " + what + " '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

void CalibrationRecord::validate() const {
    const auto n = grid_forces.size();
    if (n == 0) throw CalibrationError("calibration record is empty");
    if (loading_v.size() != n || unloading_v.size() != n) {
        throw CalibrationError("loading/unloading series must have one sample per grid force");
    }
    if (grid_forces.front() != 0.0) throw CalibrationError("calibration grid must start at 0 N");
    for (std::size_t i = 1; i < n; ++i) {
        if (!(grid_forces[i] > grid_forces[i - 1])) {
            throw CalibrationError("calibration grid must be strictly increasing", grid_forces[i]);
        }
        if (loading_v[i] < loading_v[i - 1]) {
            throw CalibrationError("loading series must be non-decreasing in force", grid_forces[i]);
        }
    }
}

std::vector<double> CalibrationRecord::averaged_v() const {
    std::vector<double> avg(grid_forces.size());
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] = 0.5 * (loading_v[i] + unloading_v[i]);
    return avg;
}

double CalibrationCurve::voltage_for(double force_n) const {
    // c2 v^2 + c1 v - q = 0; the rising root written to stay stable as c2 -> 0.
    const double q = force_n - c0;
    const double disc = std::max(c1 * c1 + 4.0 * c2 * q, 0.0);
    return 2.0 * q / (c1 + std::sqrt(disc));
}

std::vector<double> make_force_grid(double max_force_n, double step_n) {
    if (!(step_n > 0.0) || !(max_force_n >= 0.0)) {
        throw CalibrationError("force grid needs step > 0 and max >= 0");
    }
    std::vector<double> grid;
    for (int i = 0;; ++i) {
        const double f = i * step_n;
        if (f > max_force_n + 1e-9) break;
        grid.push_back(f);
    }
    return grid;
}

CalibrationRecord acquire_record(const CalibrationRig& rig, std::span<const double> grid, std::int64_t timestamp) {
    if (grid.empty()) throw CalibrationError("calibration grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0)) throw CalibrationError("calibration grid forces must be >= 0", grid[i]);
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw CalibrationError("calibration grid must be strictly increasing", grid[i]);
        }
    }
    if (rig.hysteresis_v < 0.0) throw CalibrationError("hysteresis half-width must be >= 0");

    CalibrationRecord rec;
    rec.timestamp = timestamp;
    rec.grid_forces.assign(grid.begin(), grid.end());
    rec.loading_v.resize(grid.size());
    rec.unloading_v.resize(grid.size());

    const std::size_t last = grid.size() - 1;
    auto sample = [&](std::size_t i, int branch, double offset) {
        const auto clean = voltage_from_deflection(deflection_from_force(grid[i], rig.beam), rig.sensor);
        if (clean.out_of_linear_range) {
            throw CalibrationError("sensor saturated at " + sig9(grid[i]) + " N (beam past the linear band)", grid[i]);
        }
        const auto noisy = simulate_raw_reading(grid[i], rig.beam, rig.sensor, derive_seed(rig.seed, i, branch));
        return std::clamp(noisy.volts + offset, 0.0, rig.sensor.supply_v);
    };

    for (std::size_t i = 0; i <= last; ++i) {
        const bool turnaround = i == 0 || i == last;
        rec.loading_v[i] = sample(i, 1, turnaround ? 0.0 : rig.hysteresis_v);
    }
    for (std::size_t k = 0; k <= last; ++k) {
        const std::size_t i = last - k;
        const bool turnaround = i == 0 || i == last;
        rec.unloading_v[i] = sample(i, 2, turnaround ? 0.0 : -rig.hysteresis_v);
    }
    return rec;
}

CalibrationCurve fit_curve(const CalibrationRecord& record) {
    record.validate();
    const auto n = record.grid_forces.size();
    if (n < 3) throw CalibrationError("need at least 3 grid points for a quadratic fit");

    const auto avg = record.averaged_v();
    const double mean = std::accumulate(avg.begin(), avg.end(), 0.0) / static_cast<double>(n);
    double scale = 0.0;
    for (double v : avg) scale = std::max(scale, std::abs(v - mean));
    if (!(scale > 0.0)) throw CalibrationError("rank-deficient fit: all averaged voltages are equal");

    // Fit in the centered/scaled variable u = (v - mean) / scale, then expand back to v.
    Eigen::MatrixXd vander(n, 3);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (avg[i] - mean) / scale;
        vander(i, 0) = 1.0;
        vander(i, 1) = u;
        vander(i, 2) = u * u;
        rhs(i) = record.grid_forces[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vander);
    qr.setThreshold(1e-10);
    if (qr.rank() < 3) throw CalibrationError("rank-deficient fit: fewer than 3 distinct voltages");
    const Eigen::Vector3d d = qr.solve(rhs);

    CalibrationCurve curve;
    curve.c2 = d(2) / (scale * scale);
    curve.c1 = d(1) / scale - 2.0 * d(2) * mean / (scale * scale);
    curve.c0 = d(0) - d(1) * mean / scale + d(2) * mean * mean / (scale * scale);
    curve.v_min = *std::min_element(avg.begin(), avg.end());
    curve.v_max = *std::max_element(avg.begin(), avg.end());

    // The derivative is linear in v, so checking both ends covers the whole range.
    const double slope_lo = curve.c1 + 2.0 * curve.c2 * curve.v_min;
    const double slope_hi = curve.c1 + 2.0 * curve.c2 * curve.v_max;
    if (!(slope_lo > 0.0) || !(slope_hi > 0.0)) {
        throw CalibrationError("fitted curve is not monotone increasing over the calibrated voltage range");
    }

    const auto residuals = voltage_residuals(curve, record);
    double sum = 0.0;
    double max_abs = 0.0;
    for (double r : residuals) {
        sum += std::abs(r);
        max_abs = std::max(max_abs, std::abs(r));
    }
    const double m = sum / static_cast<double>(residuals.size());
    double ss = 0.0;
    for (double r : residuals) ss += (std::abs(r) - m) * (std::abs(r) - m);
    curve.residual_mean_v = m;
    curve.residual_std_v = residuals.size() > 1 ? std::sqrt(ss / static_cast<double>(residuals.size() - 1)) : 0.0;
    curve.residual_max_v = max_abs;
    return curve;
}

std::vector<double> voltage_residuals(const CalibrationCurve& curve, const CalibrationRecord& record) {
    std::vector<double> out;
    out.reserve(2 * record.grid_forces.size());
    for (std::size_t i = 0; i < record.grid_forces.size(); ++i) {
        out.push_back(record.loading_v[i] - curve.voltage_for(record.grid_forces[i]));
    }
    for (std::size_t i = 0; i < record.grid_forces.size(); ++i) {
        out.push_back(record.unloading_v[i] - curve.voltage_for(record.grid_forces[i]));
    }
    return out;
}

ForceReadout force_from_voltage(const CalibrationCurve& curve, double v) {
    ForceReadout out;
    if (!(v >= curve.v_min) || !(v <= curve.v_max)) {
        out.out_of_range = true;
        v = std::isnan(v) ? curve.v_min : std::clamp(v, curve.v_min, curve.v_max);
    }
    out.force_n = std::max(curve.evaluate(v), 0.0);
    return out;
}

void write_record_csv(std::ostream& out, const CalibrationRecord& record) {
    out << "# swabbot calibration record\n";
    out << "# timestamp=" << record.timestamp << '\n';
    out << "force_n,loading_v,unloading_v\n";
    for (std::size_t i = 0; i < record.grid_forces.size(); ++i) {
        out << sig9(record.grid_forces[i]) << ',' << sig9(record.loading_v[i]) << ',' << sig9(record.unloading_v[i])
            << '\n';
    }
}

CalibrationRecord read_record_csv(std::istream& in) {
    CalibrationRecord rec;
    std::string line;
    std::size_t row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            constexpr std::string_view key = "# timestamp=";
            if (line.rfind(key, 0) == 0) {
                const auto s = std::string_view(line).substr(key.size());
                auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), rec.timestamp);
                if (ec != std::errc{}) throw CalibrationError("row " + std::to_string(row) + ": bad timestamp");
            }
            continue;
        }
        if (!header_seen) {
            if (line != "force_n,loading_v,unloading_v") {
                throw CalibrationError("row " + std::to_string(row) + ": expected record header");
            }
            header_seen = true;
            continue;
        }
        const auto cols = split(line, ',');
        if (cols.size() != 3) throw CalibrationError("row " + std::to_string(row) + ": expected 3 columns");
        rec.grid_forces.push_back(parse_number(cols[0], row, "force_n"));
        rec.loading_v.push_back(parse_number(cols[1], row, "loading_v"));
        rec.unloading_v.push_back(parse_number(cols[2], row, "unloading_v"));
    }
    rec.validate();
    return rec;
}

void write_curve_csv(std::ostream& out, const CalibrationCurve& curve) {
    out << "# swabbot calibration curve: force_n = c0 + c1*v + c2*v^2\n";
    out << "# c0=" << sig9(curve.c0) << ",c1=" << sig9(curve.c1) << ",c2=" << sig9(curve.c2)
        << ",residual_mean_v=" << sig9(curve.residual_mean_v) << ",residual_std_v=" << sig9(curve.residual_std_v)
        << ",residual_max_v=" << sig9(curve.residual_max_v) << ",v_min=" << sig9(curve.v_min)
        << ",v_max=" << sig9(curve.v_max) << '\n';
    out << "v,force_n\n";
    constexpr int kRows = 11;
    for (int i = 0; i < kRows; ++i) {
        const double v = curve.v_min + (curve.v_max - curve.v_min) * i / (kRows - 1);
        out << sig9(v) << ',' << sig9(curve.evaluate(v)) << '\n';
    }
}

CalibrationCurve read_curve_csv(std::istream& in) {
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.rfind("# c0=", 0) != 0) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        CalibrationCurve c;
        int seen = 0;
        for (auto field : split(std::string_view(line).substr(2), ',')) {
            const auto eq = field.find('=');
            if (eq == std::string_view::npos) throw CalibrationError("row " + std::to_string(row) + ": bad field");
            const auto key = field.substr(0, eq);
            const double v = parse_number(field.substr(eq + 1), row, "coefficient");
            if (key == "c0") c.c0 = v, seen |= 1;
            else if (key == "c1") c.c1 = v, seen |= 2;
            else if (key == "c2") c.c2 = v, seen |= 4;
            else if (key == "residual_mean_v") c.residual_mean_v = v;
            else if (key == "residual_std_v") c.residual_std_v = v;
            else if (key == "residual_max_v") c.residual_max_v = v;
            else if (key == "v_min") c.v_min = v, seen |= 8;
            else if (key == "v_max") c.v_max = v, seen |= 16;
            else throw CalibrationError("row " + std::to_string(row) + ": unknown field '" + std::string(key) + "'");
        }
        if (seen != 31) throw CalibrationError("row " + std::to_string(row) + ": curve header is missing fields");
        if (!(c.v_max > c.v_min)) throw CalibrationError("row " + std::to_string(row) + ": empty voltage range");
        return c;
    }
    throw CalibrationError("no curve header ('# c0=...') found");
}

CalibrationSettings calibration_settings_from_config(const KeyValueConfig& cfg) {
    CalibrationSettings s;
    s.grid_max_n = cfg.get_double("calibration.grid_max_n", s.grid_max_n);
    s.grid_step_n = cfg.get_double("calibration.grid_step_n", s.grid_step_n);
    s.hysteresis_v = cfg.get_double("calibration.hysteresis_v", s.hysteresis_v);
    s.seed = static_cast<std::uint64_t>(cfg.get_int("calibration.seed", static_cast<std::int64_t>(s.seed)));
    if (!(s.grid_step_n > 0.0)) throw ConfigError("calibration.grid_step_n", "calibration.grid_step_n must be > 0");
    if (!(s.grid_max_n >= 2 * s.grid_step_n)) {
        throw ConfigError("calibration.grid_max_n", "calibration.grid_max_n must allow at least 3 grid points");
    }
    if (s.hysteresis_v < 0.0) throw ConfigError("calibration.hysteresis_v", "calibration.hysteresis_v must be >= 0");
    return s;
}

}  // namespace swabbot
