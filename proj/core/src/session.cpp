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

#include "swabbot/session.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string_view>

namespace swabbot {
namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

template <class T>
bool parse_number(std::string_view tok, T& out) {
    if (tok.empty()) return false;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && ptr == tok.data() + tok.size();
}

std::int64_t round_up(std::int64_t t, std::int64_t step) { return (t + step - 1) / step * step; }

}  // namespace

RunScript read_script_csv(std::istream& in) {
    RunScript script;
    std::string line;
    std::size_t lineno = 0;
    if (!read_line(in, line)) throw FormatError(1, "empty script");
    ++lineno;
    if (line != "t_ms,kind,args") throw FormatError(lineno, "expected header 't_ms,kind,args'");

    std::uint32_t seq = 0;
    std::int64_t last_t = 0;
    bool have_end = false;
    while (read_line(in, line)) {
        ++lineno;
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split_commas(line);
        if (fields.size() != 3) throw FormatError(lineno, "expected 3 fields");
        std::int64_t t = 0;
        if (!parse_number(fields[0], t) || t < 0) throw FormatError(lineno, "bad t_ms");
        if (t < last_t) throw FormatError(lineno, "t_ms not sorted");
        if (have_end) throw FormatError(lineno, "entry after END");
        last_t = t;
        if (fields[1] == "END") {
            if (!fields[2].empty()) throw FormatError(lineno, "END takes no arguments");
            script.end_ms = t;
            have_end = true;
            continue;
        }
        // Reuse the wire decoder so scripts accept exactly what the protocol does.
        std::string frame = "CMD " + std::to_string(seq + 1) + " " + std::string(fields[1]);
        if (!fields[2].empty()) frame += " " + std::string(fields[2]);
        const auto decoded = decode_message(frame);
        if (!decoded) throw FormatError(lineno, decoded.error.field + ": " + decoded.error.message);
        ++seq;
        script.entries.push_back({t, std::get<Command>(*decoded.message)});
    }
    if (!have_end) script.end_ms = (script.entries.empty() ? 0 : script.entries.back().t_ms) + 1000;
    return script;
}

void write_script_csv(std::ostream& out, const RunScript& script) {
    out << "t_ms,kind,args\n";
    for (const auto& e : script.entries) {
        const auto& c = e.command;
        out << e.t_ms << ',';
        switch (c.kind) {
            case CommandKind::Jog: out << "JOG," << fixed4(c.x) << ' ' << fixed4(c.y); break;
            case CommandKind::Button: out << "BUTTON," << to_string(c.button); break;
            default: out << to_string(c.kind) << ','; break;
        }
        out << '\n';
    }
    out << script.end_ms << ",END,\n";
}

RunScript make_standard_script(const SystemConfig& cfg, const StandardScriptOptions& opts) {
    const std::int64_t tick = cfg.tick_ms;
    const auto& lin = cfg.motion.linear;
    const double depth = std::min(opts.insert_depth_mm, lin.max - 1.0);
    const double v = lin.max_speed;

    RunScript s;
    std::uint32_t seq = 0;
    auto add = [&](std::int64_t t, Command c) {
        c.seq = ++seq;
        s.entries.push_back({t, c});
    };

    std::int64_t t = 0;
    for (int rep = 0; rep < opts.repetitions; ++rep) {
        add(t, Command::simple(0, CommandKind::Arm));
        t += tick;
        add(t, Command::press(0, Button::Start));
        t += tick;
        // Full-stick travel covers v * t_jog once the ramps cancel out.
        const auto jog_ms = round_up(static_cast<std::int64_t>(std::llround(depth / v * 1000.0)), tick);
        const std::int64_t release = t + jog_ms;
        for (std::int64_t j = t; j < release; j += opts.jog_period_ms) add(j, Command::jog(0, 0.0, 1.0));
        add(release, Command::jog(0, 0.0, 0.0));
        const auto stop_ms = round_up(static_cast<std::int64_t>(std::ceil(v / lin.max_accel * 1000.0)), tick);
        t = release + stop_ms;
        add(t, Command::press(0, Button::DwellNow));
        const auto retract_ms =
            static_cast<std::int64_t>(std::ceil(depth / cfg.procedure.retract_speed_mm_s * 1000.0));
        t += round_up(cfg.procedure.dwell_ms + retract_ms + 1000, tick);
        add(t, Command::simple(0, CommandKind::Reset));
        t += 25 * tick;
    }
    s.end_ms = t;
    return s;
}

std::vector<Command> ScriptTransport::poll(std::int64_t now_ms) {
    std::vector<Command> out;
    while (next_ < script_.entries.size() && script_.entries[next_].t_ms <= now_ms) {
        out.push_back(script_.entries[next_].command);
        ++next_;
    }
    return out;
}

void ScriptTransport::publish(const Message& msg) {
    if (std::holds_alternative<TelemetryFrame>(msg)) ++telemetry_frames_;
    if (std::holds_alternative<PhaseEvent>(msg)) ++event_frames_;
}

std::vector<Message> SessionRecorder::step(std::span<const Command> commands) {
    auto rep = loop_.tick(commands);
    discarded_ += rep.discarded_commands;
    rows_.push_back(rep.row);
    std::vector<Message> out;
    for (const auto& tr : rep.transitions) {
        transitions_.push_back({tr.at_ms, tr.from, tr.to, std::string(tr.reason)});
        out.emplace_back(PhaseEvent{tr.at_ms, tr.from, tr.to});
    }
    for (auto& n : rep.notices) notices_.push_back(std::move(n));
    if (rep.telemetry) out.emplace_back(*rep.telemetry);
    return out;
}

void run_session(SessionRecorder& session, Transport& transport) {
    while (!transport.finished(session.loop().now_ms())) {
        const auto cmds = transport.poll(session.loop().now_ms());
        for (const auto& msg : session.step(cmds)) transport.publish(msg);
    }
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows) {
    out << kTraceHeader << '\n';
    for (const auto& r : rows) {
        out << r.t_ms << ',' << fixed4(r.depth_mm) << ',' << fixed4(r.angle_deg) << ',' << fixed4(r.force_n) << ','
            << fixed4(r.raw_v) << ',' << to_string(r.phase) << ',' << to_string(r.safety) << '\n';
    }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
    std::vector<TraceRow> rows;
    std::string line;
    if (!read_line(in, line)) throw FormatError(1, "empty trace");
    if (line != kTraceHeader) throw FormatError(1, "expected header '" + std::string(kTraceHeader) + "'");
    std::size_t lineno = 1;
    while (read_line(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_commas(line);
        if (f.size() != 7) throw FormatError(lineno, "expected 7 fields, got " + std::to_string(f.size()));
        TraceRow r;
        if (!parse_number(f[0], r.t_ms)) throw FormatError(lineno, "bad t_ms");
        if (!parse_number(f[1], r.depth_mm) || !std::isfinite(r.depth_mm)) throw FormatError(lineno, "bad depth_mm");
        if (!parse_number(f[2], r.angle_deg) || !std::isfinite(r.angle_deg)) throw FormatError(lineno, "bad angle_deg");
        if (!parse_number(f[3], r.force_n) || !std::isfinite(r.force_n)) throw FormatError(lineno, "bad force_n");
        if (!parse_number(f[4], r.raw_v) || !std::isfinite(r.raw_v)) throw FormatError(lineno, "bad raw_v");
        const auto phase = parse_phase(f[5]);
        if (!phase) throw FormatError(lineno, "bad phase");
        const auto level = parse_safety_level(f[6]);
        if (!level) throw FormatError(lineno, "bad safety");
        r.phase = *phase;
        r.safety = *level;
        if (!rows.empty() && r.t_ms <= rows.back().t_ms) throw FormatError(lineno, "t_ms not increasing");
        rows.push_back(r);
    }
    return rows;
}

namespace {

bool in_contact_phase(Phase p) {
    return p == Phase::Inserting || p == Phase::Dwell || p == Phase::RotatingRetract;
}

struct Accumulator {
    std::size_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    double max = 0.0;

    void add(double f) {
        ++n;
        sum += f;
        sum_sq += f * f;
        max = std::max(max, f);
    }
    ForceStats stats() const {
        ForceStats s;
        s.samples = n;
        if (n == 0) return s;
        s.mean_n = sum / static_cast<double>(n);
        s.max_n = max;
        if (n > 1) {
            const double var = (sum_sq - sum * s.mean_n) / static_cast<double>(n - 1);
            s.std_n = std::sqrt(std::max(var, 0.0));
        }
        return s;
    }
};

}  // namespace

RunSummary summarize(std::span<const TraceRow> rows) {
    RunSummary out;
    Accumulator pooled;
    Accumulator current;
    bool open = false;
    Phase prev = Phase::Idle;

    auto close = [&](std::int64_t end_ms, bool completed) {
        out.repetitions.back().end_ms = end_ms;
        out.repetitions.back().completed = completed;
        out.repetitions.back().force = current.stats();
        open = false;
    };

    for (const auto& r : rows) {
        if (r.phase == Phase::Fault) {
            ++out.fault_ticks;
            if (out.first_fault_ms < 0) out.first_fault_ms = r.t_ms;
        }
        if (r.phase == Phase::Inserting && prev != Phase::Inserting) {
            if (open) close(r.t_ms, false);
            out.repetitions.push_back({r.t_ms, r.t_ms, false, {}});
            current = {};
            open = true;
        }
        if (open && (r.phase == Phase::Complete || r.phase == Phase::Fault)) close(r.t_ms, r.phase == Phase::Complete);
        if (open && in_contact_phase(r.phase)) {
            current.add(r.force_n);
            pooled.add(r.force_n);
        }
        prev = r.phase;
    }
    if (open) close(rows.back().t_ms, false);
    out.pooled = pooled.stats();
    return out;
}

void write_summary(std::ostream& out, const RunSummary& s, std::span<const LoggedTransition> transitions) {
    auto stats = [&](const ForceStats& f) {
        out << "samples=" << f.samples << " mean_n=" << fixed4(f.mean_n) << " std_n=" << fixed4(f.std_n)
            << " max_n=" << fixed4(f.max_n);
    };
    for (std::size_t i = 0; i < s.repetitions.size(); ++i) {
        const auto& r = s.repetitions[i];
        out << "repetition " << i + 1 << ": start_ms=" << r.start_ms << " end_ms=" << r.end_ms << ' ';
        stats(r.force);
        out << (r.completed ? " completed" : " incomplete") << '\n';
    }
    out << "pooled: ";
    stats(s.pooled);
    out << '\n';
    out << "fault_ticks=" << s.fault_ticks;
    if (s.first_fault_ms >= 0) out << " first_fault_ms=" << s.first_fault_ms;
    out << '\n';
    out << "phase log:\n";
    for (const auto& t : transitions) {
        out << "  " << t.t_ms << ' ' << to_string(t.from) << " -> " << to_string(t.to) << " (" << t.reason << ")\n";
    }
}

}  // namespace swabbot
