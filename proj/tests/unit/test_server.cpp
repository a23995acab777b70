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

#include <sstream>
#include <thread>

#include "doctest.h"
#include "swabbot/config.hpp"
#include "swabbot/server.hpp"
#include "swabbot/websocket.hpp"
#include "tcp_client.hpp"

using namespace swabbot;
using swabbot::testing::TcpClient;

namespace {

bool contains(const std::string& hay, std::string_view needle) { return hay.find(needle) != std::string::npos; }

struct Served {
    SystemConfig cfg = system_config_from(KeyValueConfig{});
    ControlLoop loop{cfg, make_phantom_profile(), calibrate_from_config(cfg), 1};
    SessionRecorder session{loop};
    TeleopServer server{session, ServeOptions{}};
    std::uint16_t port = server.bind();
    ServeOutcome outcome = ServeOutcome::Stopped;
    std::thread thread{[this] { outcome = server.serve(); }};

    ~Served() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
    ServeOutcome join() {
        thread.join();
        return outcome;
    }
};

std::string trace_of(const SessionRecorder& s) {
    std::ostringstream out;
    write_trace_csv(out, s.rows());
    return out.str();
}

}  // namespace

TEST_CASE("serve plus scripted client reproduces the offline run byte for byte") {
    const auto cfg = system_config_from(KeyValueConfig{});
    StandardScriptOptions opts;
    opts.repetitions = 1;
    const auto script = make_standard_script(cfg, opts);

    ControlLoop offline_loop(cfg, make_phantom_profile(), calibrate_from_config(cfg), 1);
    SessionRecorder offline(offline_loop);
    ScriptTransport transport(script);
    run_session(offline, transport);

    Served s;
    const auto result = run_script_client("127.0.0.1", s.port, script);
    CHECK(s.join() == ServeOutcome::Bye);
    REQUIRE(result.config.has_value());
    CHECK(*result.config == ConfigEcho{});
    CHECK(result.errors.empty());
    CHECK_FALSE(result.busy);
    CHECK(result.telemetry.size() == transport.telemetry_frames());
    CHECK(result.events.size() == transport.event_frames());
    CHECK(trace_of(s.session) == trace_of(offline));
}

TEST_CASE("a second operator gets BUSY") {
    Served s;
    TcpClient first(s.port);
    first.send("SYNC 0\n");
    CHECK(contains(first.read_line_containing("CFG"), "CFG 2.5000 3.5000 300 20\n"));
    TcpClient second(s.port);
    second.send("CMD 1 ESTOP\n");
    CHECK(second.read_until([](const std::string&) { return false; }, 2000) == "BUSY\n");
    CHECK(second.eof());
    first.send("BYE\n");
    CHECK(s.join() == ServeOutcome::Bye);
    CHECK(s.loop.procedure().phase() == Phase::Idle);
}

TEST_CASE("malformed frames get ERR and the session continues") {
    Served s;
    TcpClient c(s.port);
    c.send("CMD 1 FLY 1 2\n");
    CHECK(contains(c.read_line_containing("ERR"), "ERR kind:"));
    c.send("TLM 0 0 0 0 0 IDLE OK 0\n");
    CHECK(contains(c.read_line_containing("not accepted"), "ERR tag: not accepted from the operator"));
    c.send(std::string(600, 'x') + "\n");
    c.send("CMD 2 ARM\nSYNC 40\n");
    CHECK(contains(c.read_line_containing("EVT"), "EVT 0 IDLE ALIGN_CHECK\n"));
    c.send("BYE\n");
    CHECK(s.join() == ServeOutcome::Bye);
}

TEST_CASE("reconnecting keeps a latched FAULT") {
    Served s;
    {
        TcpClient a(s.port);
        a.send("CMD 1 ARM\nCMD 2 ESTOP\nSYNC 100\n");
        CHECK(contains(a.read_line_containing("FAULT"), "ALIGN_CHECK FAULT"));
    }
    TcpClient b(s.port);
    b.send("SYNC 400\n");
    b.read_line_containing("TLM 360");
    CHECK(contains(b.buffer(), "FAULT ESTOP"));
    b.send("CMD 1 ARM\nSYNC 500\n");
    b.read_line_containing("TLM 460");
    CHECK(s.loop.procedure().phase() == Phase::Fault);
    CHECK(s.loop.last_seq() == 2);
    b.send("CMD 3 RESET\nSYNC 600\nBYE\n");
    CHECK(s.join() == ServeOutcome::Bye);
    CHECK(s.loop.procedure().phase() == Phase::Idle);
}

TEST_CASE("websocket operator on the same port") {
    Served s;
    TcpClient c(s.port);
    c.send("GET /console HTTP/1.1\r\nHost: localhost\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
           "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\nSec-WebSocket-Version: 13\r\n\r\n");
    c.read_line_containing("\r\n\r\n");
    REQUIRE(contains(c.buffer(), "HTTP/1.1 101"));
    CHECK(contains(c.buffer(), "Sec-WebSocket-Accept: s3pPLMBiTxaQ9kYGzzhZRbK+xOo="));
    const auto body = c.buffer().substr(c.buffer().find("\r\n\r\n") + 4);
    c.buffer() = body;

    c.send(ws::encode_frame(ws::Opcode::Text, "CMD 1 ARM", 0x01020304));
    c.send(ws::encode_frame(ws::Opcode::Text, "SYNC 60\n", 0x0a0b0c0d));
    c.send(ws::encode_frame(ws::Opcode::Ping, "hi", 7));
    ws::FrameDecoder d(false);
    std::vector<ws::Frame> frames;
    c.read_until([&](const std::string& b) {
        d = ws::FrameDecoder(false);
        frames = d.push(b);
        bool evt = false;
        bool pong = false;
        for (const auto& f : frames) {
            evt = evt || contains(f.payload, "EVT 0 IDLE ALIGN_CHECK");
            pong = pong || f.opcode == ws::Opcode::Pong;
        }
        return evt && pong;
    });
    REQUIRE_FALSE(d.failed());
    REQUIRE_FALSE(frames.empty());
    // one message per text frame, without the line terminator
    CHECK(frames.front().payload == "CFG 2.5000 3.5000 300 20");
    bool saw_evt = false;
    for (const auto& f : frames) {
        if (f.opcode == ws::Opcode::Text) CHECK(f.payload.find('\n') == std::string::npos);
        if (contains(f.payload, "EVT 0 IDLE ALIGN_CHECK")) saw_evt = true;
        if (f.opcode == ws::Opcode::Pong) CHECK(f.payload == "hi");
    }
    CHECK(saw_evt);

    c.send(ws::encode_frame(ws::Opcode::Text, "BYE\n", 99));
    CHECK(s.join() == ServeOutcome::Bye);
}

TEST_CASE("stop() ends serve without a client") {
    Served s;
    s.server.stop();
    CHECK(s.join() == ServeOutcome::Stopped);
}
