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

// Minimal RFC 6455 support: the upgrade handshake and unfragmented-or-
// continued text frames. Enough for a browser console on the same port as
// the raw line protocol.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace swabbot::ws {

enum class Opcode : std::uint8_t { Continuation = 0x0, Text = 0x1, Binary = 0x2, Close = 0x8, Ping = 0x9, Pong = 0xA };

/// base64(SHA-1(key + GUID)).
std::string accept_key(std::string_view client_key);

/// Value of Sec-WebSocket-Key if `request` is a GET upgrade request.
std::optional<std::string> upgrade_key(std::string_view request);

std::string handshake_response(std::string_view client_key);

/// Server frames are unmasked; clients must pass a masking key.
std::string encode_frame(Opcode op, std::string_view payload, std::optional<std::uint32_t> mask = std::nullopt);

struct Frame {
    Opcode opcode = Opcode::Text;
    bool fin = true;
    std::string payload;
};

/// Incremental frame parser. After a protocol error the decoder stays failed.
class FrameDecoder {
public:
    explicit FrameDecoder(bool require_mask, std::size_t max_payload = 64 * 1024)
        : require_mask_(require_mask), max_payload_(max_payload) {}

    std::vector<Frame> push(std::string_view bytes);
    bool failed() const { return !error_.empty(); }
    const std::string& error() const { return error_; }

private:
    bool require_mask_;
    std::size_t max_payload_;
    std::string buf_;
    std::string error_;
};

}  // namespace swabbot::ws
