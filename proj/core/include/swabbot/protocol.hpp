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

// Newline-delimited text protocol between the control core and the console.
//
// Operator -> core:
//   CMD <seq> JOG <x> <y>
//   CMD <seq> BUTTON <START|DWELL_NOW|RETRACT|HOME>
//   CMD <seq> <ARM|RESET|ESTOP>
//   SYNC <t_ms>        advance simulated time (ignored in real-time mode)
//   BYE                end the session and persist the trace
// Core -> operator:
//   TLM <t> <pos> <angle> <force> <voltage> <phase> <safety> <seq>
//   CFG <working_range_n> <payload_n> <staleness_ms> <telemetry_hz>
//   EVT <t> <from_phase> <to_phase>
//   ERR <text>
//   BUSY
//
// Real-valued fields are written with exactly 4 decimals.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "swabbot/procedure.hpp"

namespace swabbot {

enum class CommandKind : std::uint8_t { Jog, Button, Arm, Reset, Estop };
enum class Button : std::uint8_t { Start, DwellNow, Retract, Home };

std::string_view to_string(CommandKind k);
std::string_view to_string(Button b);

struct Command {
    std::uint32_t seq = 0;
    CommandKind kind = CommandKind::Jog;
    double x = 0.0;  // JOG only
    double y = 0.0;  // JOG only
    Button button = Button::Start;  // BUTTON only

    static Command jog(std::uint32_t seq, double x, double y) { return {seq, CommandKind::Jog, x, y, Button::Start}; }
    static Command press(std::uint32_t seq, Button b) { return {seq, CommandKind::Button, 0.0, 0.0, b}; }
    static Command simple(std::uint32_t seq, CommandKind k) { return {seq, k, 0.0, 0.0, Button::Start}; }

    friend bool operator==(const Command& a, const Command& b);
};

/// The operator-level event a non-JOG command maps to.
std::optional<OperatorEvent> to_event(const Command& cmd);

struct TelemetryFrame {
    std::int64_t t_ms = 0;
    double linear_pos_mm = 0.0;
    double angle_deg = 0.0;
    double force_n = 0.0;
    double raw_voltage_v = 0.0;
    Phase phase = Phase::Idle;
    SafetyLevel safety = SafetyLevel::Ok;
    std::uint32_t last_seq_applied = 0;

    friend bool operator==(const TelemetryFrame&, const TelemetryFrame&) = default;
};

struct ConfigEcho {
    double working_range_n = 2.5;
    double payload_n = 3.5;
    std::int64_t staleness_ms = 300;
    std::int64_t telemetry_hz = 20;

    friend bool operator==(const ConfigEcho&, const ConfigEcho&) = default;
};

struct PhaseEvent {
    std::int64_t t_ms = 0;
    Phase from = Phase::Idle;
    Phase to = Phase::Idle;

    friend bool operator==(const PhaseEvent&, const PhaseEvent&) = default;
};

struct ErrorNotice {
    std::string text;  // printable ASCII, no newline

    friend bool operator==(const ErrorNotice&, const ErrorNotice&) = default;
};

struct BusyNotice {
    friend bool operator==(const BusyNotice&, const BusyNotice&) = default;
};

struct SyncRequest {
    std::int64_t t_ms = 0;

    friend bool operator==(const SyncRequest&, const SyncRequest&) = default;
};

struct ByeRequest {
    friend bool operator==(const ByeRequest&, const ByeRequest&) = default;
};

using Message =
    std::variant<Command, TelemetryFrame, ConfigEcho, PhaseEvent, ErrorNotice, BusyNotice, SyncRequest, ByeRequest>;

/// One frame including the trailing '\n'.
std::string encode_message(const Message& msg);

struct DecodeError {
    std::string field;  // offending field name, e.g. "kind", "x", "seq"
    std::string message;
};

struct DecodeResult {
    std::optional<Message> message;
    DecodeError error;

    explicit operator bool() const { return message.has_value(); }
};

inline constexpr std::size_t kMaxFrameBytes = 512;

/// Decodes one frame; a trailing "\n" or "\r\n" is accepted. Never throws on
/// malformed input.
DecodeResult decode_message(std::string_view frame);

/// Splits a byte stream into frames. Lines longer than kMaxFrameBytes are
/// dropped and reported as empty-with-overflow entries.
class LineFramer {
public:
    struct Line {
        std::string text;
        bool overflow = false;
    };

    std::vector<Line> push(std::string_view bytes);

private:
    std::string pending_;
    bool discarding_ = false;
};

/// Formats a value with exactly 4 decimals (the wire precision).
std::string fixed4(double v);

}  // namespace swabbot
