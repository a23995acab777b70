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

#include "swabbot/protocol.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace swabbot {

std::string_view to_string(CommandKind k) {
    switch (k) {
        case CommandKind::Jog: return "JOG";
        case CommandKind::Button: return "BUTTON";
        case CommandKind::Arm: return "ARM";
        case CommandKind::Reset: return "RESET";
        case CommandKind::Estop: return "ESTOP";
    }
    return "?";
}

std::string_view to_string(Button b) {
    switch (b) {
        case Button::Start: return "START";
        case Button::DwellNow: return "DWELL_NOW";
        case Button::Retract: return "RETRACT";
        case Button::Home: return "HOME";
    }
    return "?";
}

bool operator==(const Command& a, const Command& b) {
    if (a.seq != b.seq || a.kind != b.kind) return false;
    switch (a.kind) {
        case CommandKind::Jog: return a.x == b.x && a.y == b.y;
        case CommandKind::Button: return a.button == b.button;
        default: return true;
    }
}

std::optional<OperatorEvent> to_event(const Command& cmd) {
    switch (cmd.kind) {
        case CommandKind::Jog: return std::nullopt;
        case CommandKind::Arm: return OperatorEvent::Arm;
        case CommandKind::Reset: return OperatorEvent::Reset;
        case CommandKind::Estop: return OperatorEvent::Estop;
        case CommandKind::Button:
            switch (cmd.button) {
                case Button::Start: return OperatorEvent::Start;
                case Button::DwellNow: return OperatorEvent::DwellNow;
                case Button::Retract: return OperatorEvent::Retract;
                case Button::Home: return OperatorEvent::Home;
            }
    }
    return std::nullopt;
}

std::string fixed4(double v) {
    char buf[48];
    const int n = std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

namespace {

struct Encoder {
    std::string operator()(const Command& c) const {
        std::string s = "CMD " + std::to_string(c.seq) + " " + std::string(to_string(c.kind));
        if (c.kind == CommandKind::Jog) s += " " + fixed4(c.x) + " " + fixed4(c.y);
        if (c.kind == CommandKind::Button) s += " " + std::string(to_string(c.button));
        return s;
    }
    std::string operator()(const TelemetryFrame& f) const {
        return "TLM " + std::to_string(f.t_ms) + " " + fixed4(f.linear_pos_mm) + " " + fixed4(f.angle_deg) + " " +
               fixed4(f.force_n) + " " + fixed4(f.raw_voltage_v) + " " + std::string(to_string(f.phase)) + " " +
               std::string(to_string(f.safety)) + " " + std::to_string(f.last_seq_applied);
    }
    std::string operator()(const ConfigEcho& c) const {
        return "CFG " + fixed4(c.working_range_n) + " " + fixed4(c.payload_n) + " " + std::to_string(c.staleness_ms) +
               " " + std::to_string(c.telemetry_hz);
    }
    std::string operator()(const PhaseEvent& e) const {
        return "EVT " + std::to_string(e.t_ms) + " " + std::string(to_string(e.from)) + " " +
               std::string(to_string(e.to));
    }
    std::string operator()(const ErrorNotice& e) const {
        std::string s = "ERR ";
        for (char ch : e.text) s += (ch >= 0x20 && ch < 0x7f) ? ch : '?';
        return s;
    }
    std::string operator()(const BusyNotice&) const { return "BUSY"; }
    std::string operator()(const SyncRequest& s) const { return "SYNC " + std::to_string(s.t_ms); }
    std::string operator()(const ByeRequest&) const { return "BYE"; }
};

// Tokens are separated by exactly one space; no leading/trailing blanks.
class Tokens {
public:
    explicit Tokens(std::string_view line) : rest_(line) {}

    bool next(std::string_view& tok) {
        if (done_) return false;
        const auto sp = rest_.find(' ');
        tok = rest_.substr(0, sp);
        if (sp == std::string_view::npos) {
            done_ = true;
        } else {
            rest_ = rest_.substr(sp + 1);
        }
        return true;
    }
    std::string_view remainder() const { return done_ ? std::string_view{} : rest_; }
    bool exhausted() const { return done_; }

private:
    std::string_view rest_;
    bool done_ = false;
};

DecodeResult fail(std::string field, std::string message) { return {std::nullopt, {std::move(field), std::move(message)}}; }

bool parse_real(std::string_view tok, double& out) {
    if (tok.empty() || tok.size() > 32) return false;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out, std::chars_format::fixed);
    return ec == std::errc{} && ptr == tok.data() + tok.size() && std::isfinite(out);
}

template <class Int>
bool parse_int(std::string_view tok, Int& out) {
    if (tok.empty() || tok.size() > 20) return false;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && ptr == tok.data() + tok.size();
}

std::string printable(std::string_view s) {
    std::string out;
    for (char ch : s.substr(0, 32)) out += (ch >= 0x20 && ch < 0x7f) ? ch : '?';
    return out;
}

DecodeResult decode_command(Tokens& t) {
    std::string_view tok;
    Command c;
    if (!t.next(tok) || !parse_int(tok, c.seq)) return fail("seq", "expected u32 sequence number");
    if (!t.next(tok)) return fail("kind", "missing command kind");
    if (tok == "JOG") {
        c.kind = CommandKind::Jog;
        if (!t.next(tok) || !parse_real(tok, c.x)) return fail("x", "expected JOG x");
        if (c.x < -1.0 || c.x > 1.0) return fail("x", "JOG x outside [-1, 1]");
        if (!t.next(tok) || !parse_real(tok, c.y)) return fail("y", "expected JOG y");
        if (c.y < -1.0 || c.y > 1.0) return fail("y", "JOG y outside [-1, 1]");
    } else if (tok == "BUTTON") {
        c.kind = CommandKind::Button;
        if (!t.next(tok)) return fail("button", "missing button name");
        if (tok == "START") c.button = Button::Start;
        else if (tok == "DWELL_NOW") c.button = Button::DwellNow;
        else if (tok == "RETRACT") c.button = Button::Retract;
        else if (tok == "HOME") c.button = Button::Home;
        else return fail("button", "unknown button '" + printable(tok) + "'");
    } else if (tok == "ARM") {
        c.kind = CommandKind::Arm;
    } else if (tok == "RESET") {
        c.kind = CommandKind::Reset;
    } else if (tok == "ESTOP") {
        c.kind = CommandKind::Estop;
    } else {
        return fail("kind", "unknown command kind '" + printable(tok) + "'");
    }
    if (!t.exhausted()) return fail("args", "unexpected trailing fields");
    return {Message{c}, {}};
}

DecodeResult decode_telemetry(Tokens& t) {
    std::string_view tok;
    TelemetryFrame f;
    if (!t.next(tok) || !parse_int(tok, f.t_ms)) return fail("t", "expected integer time");
    if (!t.next(tok) || !parse_real(tok, f.linear_pos_mm)) return fail("pos", "expected position");
    if (!t.next(tok) || !parse_real(tok, f.angle_deg)) return fail("angle", "expected angle");
    if (!t.next(tok) || !parse_real(tok, f.force_n)) return fail("force", "expected force");
    if (!t.next(tok) || !parse_real(tok, f.raw_voltage_v)) return fail("voltage", "expected voltage");
    if (!t.next(tok)) return fail("phase", "missing phase");
    auto phase = parse_phase(tok);
    if (!phase) return fail("phase", "unknown phase '" + printable(tok) + "'");
    f.phase = *phase;
    if (!t.next(tok)) return fail("safety", "missing safety level");
    auto level = parse_safety_level(tok);
    if (!level) return fail("safety", "unknown safety level '" + printable(tok) + "'");
    f.safety = *level;
    if (!t.next(tok) || !parse_int(tok, f.last_seq_applied)) return fail("seq", "expected u32 sequence number");
    if (!t.exhausted()) return fail("args", "unexpected trailing fields");
    return {Message{f}, {}};
}

}  // namespace

std::string encode_message(const Message& msg) { return std::visit(Encoder{}, msg) + "\n"; }

DecodeResult decode_message(std::string_view frame) {
    if (frame.size() > kMaxFrameBytes + 2) return fail("frame", "frame too long");
    if (!frame.empty() && frame.back() == '\n') frame.remove_suffix(1);
    if (!frame.empty() && frame.back() == '\r') frame.remove_suffix(1);
    if (frame.empty()) return fail("frame", "empty frame");
    for (char ch : frame) {
        if (ch < 0x20 || ch >= 0x7f) return fail("frame", "non-printable byte in frame");
    }

    Tokens t(frame);
    std::string_view tag;
    t.next(tag);
    if (tag == "CMD") return decode_command(t);
    if (tag == "TLM") return decode_telemetry(t);

    std::string_view tok;
    if (tag == "CFG") {
        ConfigEcho c;
        if (!t.next(tok) || !parse_real(tok, c.working_range_n)) return fail("working_range", "expected number");
        if (!t.next(tok) || !parse_real(tok, c.payload_n)) return fail("payload", "expected number");
        if (!t.next(tok) || !parse_int(tok, c.staleness_ms)) return fail("staleness", "expected integer");
        if (!t.next(tok) || !parse_int(tok, c.telemetry_hz)) return fail("telemetry_hz", "expected integer");
        if (!t.exhausted()) return fail("args", "unexpected trailing fields");
        return {Message{c}, {}};
    }
    if (tag == "EVT") {
        PhaseEvent e;
        if (!t.next(tok) || !parse_int(tok, e.t_ms)) return fail("t", "expected integer time");
        if (!t.next(tok)) return fail("from", "missing phase");
        auto from = parse_phase(tok);
        if (!from) return fail("from", "unknown phase '" + printable(tok) + "'");
        if (!t.next(tok)) return fail("to", "missing phase");
        auto to = parse_phase(tok);
        if (!to) return fail("to", "unknown phase '" + printable(tok) + "'");
        if (!t.exhausted()) return fail("args", "unexpected trailing fields");
        e.from = *from;
        e.to = *to;
        return {Message{e}, {}};
    }
    if (tag == "ERR") return {Message{ErrorNotice{std::string(t.remainder())}}, {}};
    if (tag == "BUSY" && t.exhausted()) return {Message{BusyNotice{}}, {}};
    if (tag == "BYE" && t.exhausted()) return {Message{ByeRequest{}}, {}};
    if (tag == "SYNC") {
        SyncRequest s;
        if (!t.next(tok) || !parse_int(tok, s.t_ms) || s.t_ms < 0) return fail("t", "expected non-negative time");
        if (!t.exhausted()) return fail("args", "unexpected trailing fields");
        return {Message{s}, {}};
    }
    return fail("tag", "unknown frame tag '" + printable(tag) + "'");
}

std::vector<LineFramer::Line> LineFramer::push(std::string_view bytes) {
    std::vector<Line> out;
    for (char ch : bytes) {
        if (ch == '\n') {
            if (discarding_) {
                out.push_back({{}, true});
                discarding_ = false;
            } else {
                if (!pending_.empty() && pending_.back() == '\r') pending_.pop_back();
                out.push_back({std::move(pending_), false});
            }
            pending_.clear();
            continue;
        }
        if (discarding_) continue;
        pending_ += ch;
        if (pending_.size() > kMaxFrameBytes) {
            pending_.clear();
            discarding_ = true;
        }
    }
    return out;
}

}  // namespace swabbot
