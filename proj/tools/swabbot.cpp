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

// swabbot: calibrate, run scripted sessions, replay traces, serve operators.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <system_error>
#include <thread>

#include "CLI11.hpp"
#include "swabbot/calibration.hpp"
#include "swabbot/config.hpp"
#include "swabbot/control_loop.hpp"
#include "swabbot/server.hpp"
#include "swabbot/session.hpp"
#include "swabbot/system_config.hpp"
#include "swabbot/tissue.hpp"

namespace {

using namespace swabbot;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

volatile std::sig_atomic_t g_interrupted = 0;

extern "C" void on_signal(int) { g_interrupted = 1; }

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

SystemConfig load_config(const std::string& path) {
    if (path.empty()) return system_config_from(KeyValueConfig{});
    return load_system_config(path);
}

// An explicit --profile wins; otherwise a tissue section in the config file,
// otherwise the phantom.
TissueProfile select_profile(const SystemConfig& cfg, const std::string& name, std::uint64_t seed) {
    if (name == "phantom") return make_phantom_profile();
    if (name == "pig") return make_pig_profile(seed);
    if (name.empty()) return cfg.tissue ? *cfg.tissue : make_phantom_profile();
    throw UsageError("--profile must be phantom or pig");
}

CalibrationCurve load_or_calibrate(const SystemConfig& cfg, const std::string& curve_path) {
    if (curve_path.empty()) return calibrate_from_config(cfg);
    std::ifstream in(curve_path);
    if (!in) throw std::runtime_error("cannot open curve file " + curve_path);
    return read_curve_csv(in);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

std::string trace_text(const SessionRecorder& s) {
    std::ostringstream os;
    write_trace_csv(os, s.rows());
    return os.str();
}

std::string with_seed_suffix(const std::string& path, std::uint64_t seed) {
    const auto dot = path.rfind('.');
    const auto slash = path.rfind('/');
    const std::string tag = "-seed" + std::to_string(seed);
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag;
    return path.substr(0, dot) + tag + path.substr(dot);
}

RunScript load_script(const std::string& path, const SystemConfig& cfg) {
    if (path.empty()) return make_standard_script(cfg);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open script " + path);
    return read_script_csv(in);
}

struct Options {
    std::string config;
    std::string profile;
    std::vector<std::uint64_t> seeds{1};
    std::string out;
    std::string curve;
    std::string record;
    std::string script;
    std::string trace;
    std::string host = "127.0.0.1";
    std::uint16_t port = 7070;
    bool realtime = false;
    double speed = 1.0;
    std::size_t decimation = 1;
};

int cmd_calibrate(const Options& o) {
    const auto cfg = load_config(o.config);
    CalibrationRecord record;
    const auto curve = calibrate_from_config(cfg, &record);
    std::ostringstream curve_csv;
    write_curve_csv(curve_csv, curve);
    if (!o.out.empty()) write_file(o.out, curve_csv.str());
    if (!o.record.empty()) {
        std::ostringstream rec;
        write_record_csv(rec, record);
        write_file(o.record, rec.str());
    }
    std::printf("grid_points=%zu\n", record.grid_forces.size());
    std::printf("force = %.9g + %.9g*v + %.9g*v^2\n", curve.c0, curve.c1, curve.c2);
    std::printf("valid_v=[%.6f, %.6f]\n", curve.v_min, curve.v_max);
    std::printf("residual_mean_v=%.6f residual_std_v=%.6f residual_max_v=%.6f\n", curve.residual_mean_v,
                curve.residual_std_v, curve.residual_max_v);
    return kExitOk;
}

int cmd_run(const Options& o) {
    const auto cfg = load_config(o.config);
    select_profile(cfg, o.profile, o.seeds.front());  // validate before the expensive part
    const auto curve = load_or_calibrate(cfg, o.curve);
    const auto script = load_script(o.script, cfg);
    const bool many = o.seeds.size() > 1;
    for (const auto seed : o.seeds) {
        ControlLoop loop(cfg, select_profile(cfg, o.profile, seed), curve, seed);
        SessionRecorder session(loop);
        ScriptTransport transport(script);
        run_session(session, transport);
        if (!o.out.empty()) write_file(many ? with_seed_suffix(o.out, seed) : o.out, trace_text(session));
        std::cout << "seed " << seed << " profile " << loop.profile().name << " ticks " << session.rows().size()
                  << " telemetry_frames " << transport.telemetry_frames() << '\n';
        write_summary(std::cout, summarize(session.rows()), session.transitions());
        for (const auto& n : session.notices()) std::cout << "notice: " << n << '\n';
    }
    return kExitOk;
}

int cmd_replay(const Options& o) {
    if (!(o.speed > 0.0)) throw UsageError("--speed must be > 0");
    if (o.decimation == 0) throw UsageError("--decimation must be >= 1");
    std::ifstream in(o.trace);
    if (!in) throw std::runtime_error("cannot open trace " + o.trace);
    const auto rows = read_trace_csv(in);
    const auto start = std::chrono::steady_clock::now();
    std::size_t frames = 0;
    for (std::size_t i = o.decimation - 1; i < rows.size(); i += o.decimation) {
        const auto& r = rows[i];
        if (o.realtime) {
            const auto due = std::chrono::duration<double, std::milli>(static_cast<double>(r.t_ms) / o.speed);
            std::this_thread::sleep_until(start + std::chrono::duration_cast<std::chrono::nanoseconds>(due));
        }
        std::cout << encode_message(TelemetryFrame{r.t_ms, r.depth_mm, r.angle_deg, r.force_n, r.raw_v, r.phase,
                                                   r.safety, 0});
        ++frames;
    }
    std::cerr << "replayed " << frames << " frames from " << rows.size() << " rows\n";
    return kExitOk;
}

int cmd_serve(const Options& o) {
    const auto cfg = load_config(o.config);
    const auto seed = o.seeds.front();
    ControlLoop loop(cfg, select_profile(cfg, o.profile, seed), load_or_calibrate(cfg, o.curve), seed);
    SessionRecorder session(loop);
    TeleopServer server(session, {o.host, o.port, o.realtime});
    std::uint16_t port = 0;
    try {
        port = server.bind();
    } catch (const std::system_error& e) {
        std::cerr << "swabbot: cannot listen: " << e.what() << '\n';
        return kExitRuntime;
    }
    std::cout << "listening on " << o.host << ':' << port << (o.realtime ? " (real-time)" : " (simulated time)")
              << std::endl;

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::atomic<bool> served{false};
    std::thread watcher([&] {
        while (!served) {
            if (g_interrupted) server.stop();
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
    });
    const auto outcome = server.serve();
    served = true;
    watcher.join();

    if (!o.out.empty()) write_file(o.out, trace_text(session));
    std::cout << "session " << (outcome == ServeOutcome::Bye ? "ended by operator" : "stopped") << " after "
              << session.rows().size() << " ticks\n";
    write_summary(std::cout, summarize(session.rows()), session.transitions());
    return kExitOk;
}

int cmd_client(const Options& o) {
    const auto cfg = load_config(o.config);
    const auto script = load_script(o.script, cfg);
    const auto result = run_script_client(o.host, o.port, script);
    if (result.busy) {
        std::cerr << "swabbot: server busy\n";
        return kExitRuntime;
    }
    std::cout << "telemetry_frames " << result.telemetry.size() << " phase_events " << result.events.size()
              << " errors " << result.errors.size() << '\n';
    for (const auto& e : result.events) std::cout << encode_message(e);
    for (const auto& e : result.errors) std::cout << "ERR " << e << '\n';
    return kExitOk;
}

int cmd_script(const Options& o) {
    const auto cfg = load_config(o.config);
    std::ostringstream os;
    write_script_csv(os, make_standard_script(cfg));
    if (o.out.empty()) {
        std::cout << os.str();
    } else {
        write_file(o.out, os.str());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Teleoperated swab robot control stack and plant simulator"};
    app.require_subcommand(1);
    Options o;

    auto add_config = [&](CLI::App* c) { c->add_option("--config", o.config, "key = value config file"); };
    auto add_plant = [&](CLI::App* c) {
        c->add_option("--profile", o.profile, "tissue profile")->check(CLI::IsMember({"phantom", "pig"}));
        c->add_option("--curve", o.curve, "calibration curve CSV (default: calibrate from config)");
    };

    auto* calibrate = app.add_subcommand("calibrate", "calibrate the simulated gripper and write the curve");
    add_config(calibrate);
    calibrate->add_option("--out", o.out, "curve CSV output");
    calibrate->add_option("--record", o.record, "raw loading/unloading record CSV output");

    auto* run = app.add_subcommand("run", "run a scripted session in simulated time");
    add_config(run);
    add_plant(run);
    run->add_option("--seed", o.seeds, "sensor and specimen seed; repeat for several runs");
    run->add_option("--script", o.script, "script CSV (default: standard 3-repetition script)");
    run->add_option("--out", o.out, "trace CSV output");

    auto* replay = app.add_subcommand("replay", "re-emit telemetry frames from a trace");
    replay->add_option("trace", o.trace, "trace CSV")->required();
    replay->add_option("--speed", o.speed, "playback speed factor (> 0)");
    replay->add_option("--decimation", o.decimation, "emit every Nth row");
    replay->add_flag("--realtime", o.realtime, "pace frames by their timestamps");

    auto* serve = app.add_subcommand("serve", "run the teleoperation server");
    add_config(serve);
    add_plant(serve);
    serve->add_option("--seed", o.seeds, "sensor and specimen seed")->expected(1);
    serve->add_option("--host", o.host, "bind address");
    serve->add_option("--port", o.port, "TCP port (0 for ephemeral)");
    serve->add_flag("--realtime", o.realtime, "pace ticks on the wall clock");
    serve->add_option("--out", o.out, "trace CSV written when the session ends");

    auto* client = app.add_subcommand("client", "play a script against a simulated-time server");
    add_config(client);
    client->add_option("--host", o.host, "server address");
    client->add_option("--port", o.port, "server port")->required();
    client->add_option("--script", o.script, "script CSV (default: standard script)");

    auto* script = app.add_subcommand("script", "write the standard 3-repetition script");
    add_config(script);
    script->add_option("--out", o.out, "script CSV output (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*calibrate) return cmd_calibrate(o);
        if (*run) return cmd_run(o);
        if (*replay) return cmd_replay(o);
        if (*serve) return cmd_serve(o);
        if (*client) return cmd_client(o);
        if (*script) return cmd_script(o);
    } catch (const ConfigError& e) {
        std::cerr << "swabbot: config error: " << e.key() << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "swabbot: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "swabbot: malformed input at " << e.what() << '\n';
        return kExitUsage;
    } catch (const CalibrationError& e) {
        std::cerr << "swabbot: calibration failed: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "swabbot: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
