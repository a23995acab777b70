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

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "swabbot/protocol.hpp"
#include "swabbot/session.hpp"

namespace swabbot {

struct ServeOptions {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;  // 0 picks an ephemeral port
    /// Pace ticks on the wall clock instead of waiting for SYNC frames.
    bool realtime = false;
    /// How long to wait for a client's first bytes before assuming raw lines.
    int sniff_ms = 200;
};

enum class ServeOutcome { Bye, Stopped };

/// Single-operator TCP endpoint for the text protocol, with a websocket
/// upgrade on the same port.
///
/// Threads: the caller's thread accepts, one reader per connection feeds an
/// ordered inbox, and one control thread is the only caller of
/// SessionRecorder::step. A second concurrent connection gets BUSY. The control
/// loop (and its latched safety state) outlives individual connections.
class TeleopServer {
public:
    TeleopServer(SessionRecorder& session, ServeOptions opts);
    ~TeleopServer();
    TeleopServer(const TeleopServer&) = delete;
    TeleopServer& operator=(const TeleopServer&) = delete;

    /// Binds and listens; returns the bound port. Throws std::system_error.
    std::uint16_t bind();

    /// Blocks until BYE or stop().
    ServeOutcome serve();

    /// Safe from any thread, including a signal-watching one.
    void stop();

private:
    struct Connection;
    using InboxItem = std::variant<Command, SyncRequest, ByeRequest>;

    void control_thread();
    void reader_thread(std::shared_ptr<Connection> conn, std::string pending);
    void send_frames(const std::vector<Message>& frames);
    void send_to(Connection& conn, const Message& msg);
    void refuse_busy(int fd);
    void accept_one(int fd);
    void push_inbox(InboxItem item);

    SessionRecorder& session_;
    ServeOptions opts_;
    int listen_fd_ = -1;

    std::atomic<bool> done_{false};
    std::optional<ServeOutcome> outcome_;

    std::mutex inbox_mu_;
    std::condition_variable inbox_cv_;
    std::deque<InboxItem> inbox_;

    std::mutex conn_mu_;
    std::shared_ptr<Connection> current_;
    std::thread reader_;
};

struct ClientResult {
    std::optional<ConfigEcho> config;
    std::vector<TelemetryFrame> telemetry;
    std::vector<PhaseEvent> events;
    std::vector<std::string> errors;
    bool busy = false;
};

/// Plays `script` against a simulated-time server: every entry is preceded by
/// SYNC to its timestamp, and the session ends with SYNC to the script end
/// followed by BYE. Returns once the server closes the connection.
ClientResult run_script_client(const std::string& host, std::uint16_t port, const RunScript& script);

}  // namespace swabbot
