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

#include "swabbot/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <system_error>

#include "swabbot/websocket.hpp"

namespace swabbot {
namespace {

constexpr std::size_t kMaxHandshakeBytes = 8192;

bool send_all(int fd, std::string_view bytes) {
    while (!bytes.empty()) {
        const ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

bool wait_readable(int fd, int timeout_ms) {
    pollfd p{fd, POLLIN, 0};
    int r = 0;
    do {
        r = ::poll(&p, 1, timeout_ms);
    } while (r < 0 && errno == EINTR);
    return r > 0;
}

// Reads whatever arrives within `timeout_ms`; empty on timeout or EOF.
std::string recv_some(int fd, int timeout_ms) {
    if (!wait_readable(fd, timeout_ms)) return {};
    char buf[4096];
    const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
    return n > 0 ? std::string(buf, static_cast<std::size_t>(n)) : std::string{};
}

void set_timeouts(int fd, int seconds) {
    timeval tv{seconds, 0};
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

struct Sniffed {
    bool websocket = false;
    bool rejected = false;
    std::string leftover;  // bytes after the handshake, or the first raw bytes
};

// Distinguishes a websocket upgrade from raw protocol lines and completes the
// handshake when needed.
Sniffed sniff(int fd, int sniff_ms) {
    Sniffed s;
    std::string buf = recv_some(fd, sniff_ms);
    if (buf.compare(0, 4, "GET ") != 0) {
        s.leftover = std::move(buf);
        return s;
    }
    while (buf.find("\r\n\r\n") == std::string::npos && buf.size() < kMaxHandshakeBytes) {
        auto more = recv_some(fd, 1000);
        if (more.empty()) break;
        buf += more;
    }
    const auto end = buf.find("\r\n\r\n");
    const auto key = end == std::string::npos ? std::nullopt : ws::upgrade_key(std::string_view(buf).substr(0, end));
    if (!key) {
        send_all(fd, "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n");
        s.rejected = true;
        return s;
    }
    send_all(fd, ws::handshake_response(*key));
    s.websocket = true;
    s.leftover = buf.substr(end + 4);
    return s;
}

std::string frame_bytes(const Message& msg, bool websocket) {
    auto line = encode_message(msg);
    if (!websocket) return line;
    line.pop_back();
    return ws::encode_frame(ws::Opcode::Text, line);
}

}  // namespace

struct TeleopServer::Connection {
    explicit Connection(int f, bool w) : fd(f), websocket(w) {}
    ~Connection() { ::close(fd); }

    void shut() {
        open = false;
        ::shutdown(fd, SHUT_RDWR);
    }

    int fd;
    bool websocket;
    std::mutex send_mu;
    std::atomic<bool> open{true};
};

TeleopServer::TeleopServer(SessionRecorder& session, ServeOptions opts) : session_(session), opts_(std::move(opts)) {}

TeleopServer::~TeleopServer() {
    stop();
    {
        std::lock_guard lock(conn_mu_);
        if (current_) current_->shut();
    }
    if (reader_.joinable()) reader_.join();
    if (listen_fd_ >= 0) ::close(listen_fd_);
}

std::uint16_t TeleopServer::bind() {
    const std::string where = opts_.host + ":" + std::to_string(opts_.port);
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const int gai = ::getaddrinfo(opts_.host.c_str(), std::to_string(opts_.port).c_str(), &hints, &res);
    if (gai != 0) throw std::system_error(EINVAL, std::generic_category(), "resolve " + where + ": " + gai_strerror(gai));

    listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (listen_fd_ < 0) {
        ::freeaddrinfo(res);
        throw std::system_error(errno, std::generic_category(), "socket");
    }
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    const int rc = ::bind(listen_fd_, res->ai_addr, res->ai_addrlen);
    const int bind_errno = errno;
    ::freeaddrinfo(res);
    if (rc != 0) throw std::system_error(bind_errno, std::generic_category(), "bind " + where);
    if (::listen(listen_fd_, 4) != 0) throw std::system_error(errno, std::generic_category(), "listen " + where);

    sockaddr_in addr{};
    socklen_t len = sizeof(addr);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    return ntohs(addr.sin_port);
}

void TeleopServer::stop() {
    done_ = true;
    inbox_cv_.notify_all();
}

ServeOutcome TeleopServer::serve() {
    if (listen_fd_ < 0) bind();
    std::thread control(&TeleopServer::control_thread, this);
    while (!done_) {
        if (!wait_readable(listen_fd_, 100)) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd >= 0) accept_one(fd);
    }
    control.join();
    {
        std::lock_guard lock(conn_mu_);
        if (current_) current_->shut();
    }
    if (reader_.joinable()) reader_.join();
    return outcome_.value_or(ServeOutcome::Stopped);
}

void TeleopServer::accept_one(int fd) {
    set_timeouts(fd, 2);
    bool busy = false;
    {
        std::lock_guard lock(conn_mu_);
        busy = current_ && current_->open;
    }
    if (busy) {
        refuse_busy(fd);
        return;
    }
    auto s = sniff(fd, opts_.sniff_ms);
    if (s.rejected) {
        ::close(fd);
        return;
    }
    auto conn = std::make_shared<Connection>(fd, s.websocket);
    send_to(*conn, session_.loop().config_echo());
    if (reader_.joinable()) reader_.join();
    {
        std::lock_guard lock(conn_mu_);
        current_ = conn;
    }
    reader_ = std::thread(&TeleopServer::reader_thread, this, conn, std::move(s.leftover));
}

void TeleopServer::refuse_busy(int fd) {
    auto s = sniff(fd, opts_.sniff_ms);
    if (!s.rejected) {
        send_all(fd, frame_bytes(BusyNotice{}, s.websocket));
        if (s.websocket) send_all(fd, ws::encode_frame(ws::Opcode::Close, ""));
    }
    ::close(fd);
}

void TeleopServer::push_inbox(InboxItem item) {
    {
        std::lock_guard lock(inbox_mu_);
        inbox_.push_back(std::move(item));
    }
    inbox_cv_.notify_all();
}

void TeleopServer::send_to(Connection& conn, const Message& msg) {
    if (!conn.open) return;
    std::lock_guard lock(conn.send_mu);
    if (!send_all(conn.fd, frame_bytes(msg, conn.websocket))) conn.shut();
}

void TeleopServer::send_frames(const std::vector<Message>& frames) {
    std::shared_ptr<Connection> conn;
    {
        std::lock_guard lock(conn_mu_);
        conn = current_;
    }
    if (!conn) return;
    for (const auto& m : frames) send_to(*conn, m);
}

void TeleopServer::reader_thread(std::shared_ptr<Connection> conn, std::string pending) {
    LineFramer framer;
    ws::FrameDecoder decoder(/*require_mask=*/true);
    std::string message;

    auto handle_line = [&](const LineFramer::Line& line) {
        if (line.overflow) {
            send_to(*conn, ErrorNotice{"frame: frame too long"});
            return;
        }
        if (line.text.empty()) return;
        auto r = decode_message(line.text);
        if (!r) {
            send_to(*conn, ErrorNotice{r.error.field + ": " + r.error.message});
            return;
        }
        if (auto* c = std::get_if<Command>(&*r.message)) {
            push_inbox(*c);
        } else if (auto* s = std::get_if<SyncRequest>(&*r.message)) {
            push_inbox(*s);
        } else if (std::holds_alternative<ByeRequest>(*r.message)) {
            push_inbox(ByeRequest{});
        } else {
            send_to(*conn, ErrorNotice{"tag: not accepted from the operator"});
        }
    };
    auto handle_text = [&](std::string_view text) {
        for (const auto& line : framer.push(text)) handle_line(line);
    };
    // False once the peer asked to close or broke the framing.
    auto handle_bytes = [&](std::string_view bytes) -> bool {
        if (!conn->websocket) {
            handle_text(bytes);
            return true;
        }
        for (auto& f : decoder.push(bytes)) {
            switch (f.opcode) {
                case ws::Opcode::Text:
                case ws::Opcode::Continuation:
                    message += f.payload;
                    if (f.fin) {
                        // Browsers send one protocol frame per message, usually without '\n'.
                        if (message.empty() || message.back() != '\n') message += '\n';
                        handle_text(message);
                        message.clear();
                    }
                    break;
                case ws::Opcode::Binary:
                    send_to(*conn, ErrorNotice{"frame: binary messages not supported"});
                    break;
                case ws::Opcode::Ping: {
                    std::lock_guard lock(conn->send_mu);
                    send_all(conn->fd, ws::encode_frame(ws::Opcode::Pong, f.payload));
                    break;
                }
                case ws::Opcode::Pong: break;
                case ws::Opcode::Close: {
                    std::lock_guard lock(conn->send_mu);
                    send_all(conn->fd, ws::encode_frame(ws::Opcode::Close, ""));
                    return false;
                }
            }
        }
        return !decoder.failed();
    };

    bool alive = pending.empty() || handle_bytes(pending);
    while (alive && !done_ && conn->open) {
        if (!wait_readable(conn->fd, 100)) continue;
        char buf[4096];
        const ssize_t n = ::recv(conn->fd, buf, sizeof(buf), 0);
        if (n < 0 && (errno == EINTR || errno == EAGAIN)) continue;
        if (n <= 0) break;
        alive = handle_bytes(std::string_view(buf, static_cast<std::size_t>(n)));
    }
    conn->shut();
}

void TeleopServer::control_thread() {
    std::vector<Command> pending;
    auto tick = [&] {
        send_frames(session_.step(pending));
        pending.clear();
    };

    if (opts_.realtime) {
        const auto period = std::chrono::milliseconds(session_.loop().config().tick_ms);
        auto next = std::chrono::steady_clock::now();
        while (!done_) {
            std::deque<InboxItem> items;
            {
                std::lock_guard lock(inbox_mu_);
                items.swap(inbox_);
            }
            bool bye = false;
            for (auto& item : items) {
                if (auto* c = std::get_if<Command>(&item)) pending.push_back(*c);
                if (std::holds_alternative<ByeRequest>(item)) {
                    bye = true;
                    break;
                }
            }
            tick();
            if (bye) {
                outcome_ = ServeOutcome::Bye;
                stop();
                return;
            }
            next += period;
            std::unique_lock lock(inbox_mu_);
            inbox_cv_.wait_until(lock, next, [&] { return done_.load(); });
        }
        return;
    }

    while (true) {
        InboxItem item;
        {
            std::unique_lock lock(inbox_mu_);
            inbox_cv_.wait(lock, [&] { return done_.load() || !inbox_.empty(); });
            if (done_) return;
            item = std::move(inbox_.front());
            inbox_.pop_front();
        }
        if (auto* c = std::get_if<Command>(&item)) {
            pending.push_back(*c);
        } else if (auto* s = std::get_if<SyncRequest>(&item)) {
            while (session_.loop().now_ms() < s->t_ms && !done_) tick();
        } else {
            outcome_ = ServeOutcome::Bye;
            stop();
            return;
        }
    }
}

ClientResult run_script_client(const std::string& host, std::uint16_t port, const RunScript& script) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string where = host + ":" + std::to_string(port);
    if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0) {
        throw std::system_error(EINVAL, std::generic_category(), "resolve " + where);
    }
    const int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    const int rc = fd < 0 ? -1 : ::connect(fd, res->ai_addr, res->ai_addrlen);
    const int err = errno;
    ::freeaddrinfo(res);
    if (rc != 0) {
        if (fd >= 0) ::close(fd);
        throw std::system_error(err, std::generic_category(), "connect " + where);
    }
    set_timeouts(fd, 30);

    ClientResult result;
    std::thread reader([&] {
        LineFramer framer;
        char buf[4096];
        while (true) {
            const ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
            if (n < 0 && errno == EINTR) continue;
            if (n <= 0) break;
            for (const auto& line : framer.push(std::string_view(buf, static_cast<std::size_t>(n)))) {
                auto r = decode_message(line.text);
                if (!r) continue;
                if (auto* t = std::get_if<TelemetryFrame>(&*r.message)) result.telemetry.push_back(*t);
                else if (auto* e = std::get_if<PhaseEvent>(&*r.message)) result.events.push_back(*e);
                else if (auto* c = std::get_if<ConfigEcho>(&*r.message)) result.config = *c;
                else if (auto* x = std::get_if<ErrorNotice>(&*r.message)) result.errors.push_back(x->text);
                else if (std::holds_alternative<BusyNotice>(*r.message)) result.busy = true;
            }
        }
    });

    std::string out;
    for (const auto& e : script.entries) {
        out += encode_message(SyncRequest{e.t_ms});
        out += encode_message(e.command);
    }
    out += encode_message(SyncRequest{script.end_ms});
    out += encode_message(ByeRequest{});
    const bool sent = send_all(fd, out);
    if (!sent) ::shutdown(fd, SHUT_RDWR);
    reader.join();
    ::close(fd);
    if (!sent && !result.busy) throw std::system_error(EPIPE, std::generic_category(), "send to " + where);
    return result;
}

}  // namespace swabbot
