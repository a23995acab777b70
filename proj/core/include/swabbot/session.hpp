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
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "swabbot/control_loop.hpp"
#include "swabbot/protocol.hpp"

namespace swabbot {

/// Malformed script or trace file. `line()` is 1-based and counts the header.
class FormatError : public std::runtime_error {
public:
    FormatError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct ScriptEntry {
    std::int64_t t_ms = 0;
    Command command;
};

/// Timed operator commands. Sequence numbers are assigned 1..n in file order.
///
/// CSV layout (`t_ms,kind,args`):
///   0,ARM,
///   20,BUTTON,START
///   40,JOG,0 1
///   90000,END,
/// The optional END row sets the session length; without it the session ends
/// one second after the last command.
struct RunScript {
    std::vector<ScriptEntry> entries;
    std::int64_t end_ms = 0;
};

RunScript read_script_csv(std::istream& in);
void write_script_csv(std::ostream& out, const RunScript& script);

struct StandardScriptOptions {
    int repetitions = 3;
    double insert_depth_mm = 75.0;
    std::int64_t jog_period_ms = 100;
};

/// ARM, START, joystick forward until the insertion depth is reached, release,
/// DWELL_NOW, wait out the dwell and the rotating retraction, RESET; repeated.
/// The timing is derived from the motion and procedure settings in `cfg`.
RunScript make_standard_script(const SystemConfig& cfg, const StandardScriptOptions& opts = {});

/// Source of operator commands and sink for outbound frames.
class Transport {
public:
    virtual ~Transport() = default;
    /// Commands that become visible at simulated time `now_ms`.
    virtual std::vector<Command> poll(std::int64_t now_ms) = 0;
    /// True once the session should stop before ticking at `now_ms`.
    virtual bool finished(std::int64_t now_ms) const = 0;
    virtual void publish(const Message& msg) = 0;
};

/// Replays a RunScript; outbound frames are counted, not stored.
class ScriptTransport : public Transport {
public:
    explicit ScriptTransport(RunScript script) : script_(std::move(script)) {}

    std::vector<Command> poll(std::int64_t now_ms) override;
    bool finished(std::int64_t now_ms) const override { return now_ms >= script_.end_ms; }
    void publish(const Message& msg) override;

    std::size_t telemetry_frames() const { return telemetry_frames_; }
    std::size_t event_frames() const { return event_frames_; }

private:
    RunScript script_;
    std::size_t next_ = 0;
    std::size_t telemetry_frames_ = 0;
    std::size_t event_frames_ = 0;
};

struct LoggedTransition {
    std::int64_t t_ms = 0;
    Phase from = Phase::Idle;
    Phase to = Phase::Idle;
    std::string reason;
};

/// Owns the trace of one ControlLoop and turns each tick into outbound frames.
class SessionRecorder {
public:
    explicit SessionRecorder(ControlLoop& loop) : loop_(loop) {}

    /// Ticks once; returns the EVT and TLM frames to send, in order.
    std::vector<Message> step(std::span<const Command> commands);

    ControlLoop& loop() { return loop_; }
    const std::vector<TraceRow>& rows() const { return rows_; }
    const std::vector<LoggedTransition>& transitions() const { return transitions_; }
    const std::vector<std::string>& notices() const { return notices_; }
    std::uint64_t discarded_commands() const { return discarded_; }

private:
    ControlLoop& loop_;
    std::vector<TraceRow> rows_;
    std::vector<LoggedTransition> transitions_;
    std::vector<std::string> notices_;
    std::uint64_t discarded_ = 0;
};

/// Runs in simulated time until the transport reports it is finished.
void run_session(SessionRecorder& session, Transport& transport);

inline constexpr std::string_view kTraceHeader = "t_ms,depth_mm,angle_deg,force_n,raw_v,phase,safety";

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows);
std::vector<TraceRow> read_trace_csv(std::istream& in);

struct ForceStats {
    std::size_t samples = 0;
    double mean_n = 0.0;
    double std_n = 0.0;
    double max_n = 0.0;
};

struct RepetitionSummary {
    std::int64_t start_ms = 0;  // entry into INSERTING
    std::int64_t end_ms = 0;    // entry into COMPLETE or FAULT, or the last tick
    bool completed = false;
    ForceStats force;
};

struct RunSummary {
    std::vector<RepetitionSummary> repetitions;
    ForceStats pooled;
    std::size_t fault_ticks = 0;
    /// First tick spent in FAULT, or -1.
    std::int64_t first_fault_ms = -1;
};

/// Statistics of the calibrated force over INSERTING, DWELL and
/// ROTATING_RETRACT rows, split at each entry into INSERTING.
RunSummary summarize(std::span<const TraceRow> rows);

void write_summary(std::ostream& out, const RunSummary& summary, std::span<const LoggedTransition> transitions);

}  // namespace swabbot
