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

#include "swabbot/websocket.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <array>
#include <cctype>

namespace swabbot::ws {
namespace {

constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string accept_key(std::string_view client_key) {
    std::string joined(client_key);
    joined += kGuid;
    std::array<unsigned char, SHA_DIGEST_LENGTH> digest{};
    SHA1(reinterpret_cast<const unsigned char*>(joined.data()), joined.size(), digest.data());
    std::array<unsigned char, 4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1> out{};
    const int n = EVP_EncodeBlock(out.data(), digest.data(), SHA_DIGEST_LENGTH);
    return std::string(reinterpret_cast<const char*>(out.data()), static_cast<std::size_t>(n));
}

std::optional<std::string> upgrade_key(std::string_view request) {
    if (request.substr(0, 4) != "GET ") return std::nullopt;
    bool upgrade = false;
    std::optional<std::string> key;
    std::size_t pos = request.find('\n');
    while (pos != std::string_view::npos && pos + 1 < request.size()) {
        const auto next = request.find('\n', pos + 1);
        const auto line = trim(request.substr(pos + 1, next == std::string_view::npos ? next : next - pos - 1));
        pos = next;
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        const auto name = trim(line.substr(0, colon));
        const auto value = trim(line.substr(colon + 1));
        if (iequals(name, "Upgrade") && iequals(value, "websocket")) upgrade = true;
        if (iequals(name, "Sec-WebSocket-Key")) key = std::string(value);
    }
    if (!upgrade || !key || key->empty()) return std::nullopt;
    return key;
}

std::string handshake_response(std::string_view client_key) {
    return "HTTP/1.1 101 Switching Protocols\r\n"
           "Upgrade: websocket\r\n"
           "Connection: Upgrade\r\n"
           "Sec-WebSocket-Accept: " +
           accept_key(client_key) + "\r\n\r\n";
}

std::string encode_frame(Opcode op, std::string_view payload, std::optional<std::uint32_t> mask) {
    std::string out;
    out += static_cast<char>(0x80 | static_cast<std::uint8_t>(op));
    const std::uint8_t mask_bit = mask ? 0x80 : 0x00;
    const std::size_t n = payload.size();
    if (n < 126) {
        out += static_cast<char>(mask_bit | n);
    } else if (n <= 0xFFFF) {
        out += static_cast<char>(mask_bit | 126);
        out += static_cast<char>((n >> 8) & 0xFF);
        out += static_cast<char>(n & 0xFF);
    } else {
        out += static_cast<char>(mask_bit | 127);
        for (int i = 7; i >= 0; --i) out += static_cast<char>((static_cast<std::uint64_t>(n) >> (8 * i)) & 0xFF);
    }
    if (!mask) return out + std::string(payload);
    std::array<char, 4> key{};
    for (int i = 0; i < 4; ++i) key[i] = static_cast<char>((*mask >> (8 * (3 - i))) & 0xFF);
    out.append(key.data(), 4);
    for (std::size_t i = 0; i < n; ++i) out += static_cast<char>(payload[i] ^ key[i % 4]);
    return out;
}

std::vector<Frame> FrameDecoder::push(std::string_view bytes) {
    std::vector<Frame> frames;
    if (failed()) return frames;
    buf_.append(bytes);
    while (true) {
        if (buf_.size() < 2) break;
        const auto b0 = static_cast<std::uint8_t>(buf_[0]);
        const auto b1 = static_cast<std::uint8_t>(buf_[1]);
        if (b0 & 0x70) {
            error_ = "reserved bits set";
            break;
        }
        const bool masked = (b1 & 0x80) != 0;
        if (require_mask_ && !masked) {
            error_ = "client frame not masked";
            break;
        }
        std::size_t header = 2;
        std::uint64_t len = b1 & 0x7F;
        if (len == 126) {
            if (buf_.size() < 4) break;
            len = (static_cast<std::uint64_t>(static_cast<std::uint8_t>(buf_[2])) << 8) |
                  static_cast<std::uint8_t>(buf_[3]);
            header = 4;
        } else if (len == 127) {
            if (buf_.size() < 10) break;
            len = 0;
            for (int i = 0; i < 8; ++i) len = (len << 8) | static_cast<std::uint8_t>(buf_[2 + i]);
            header = 10;
        }
        if (len > max_payload_) {
            error_ = "frame too large";
            break;
        }
        const std::size_t mask_len = masked ? 4 : 0;
        const std::size_t total = header + mask_len + static_cast<std::size_t>(len);
        if (buf_.size() < total) break;

        Frame f;
        f.fin = (b0 & 0x80) != 0;
        const std::uint8_t op = b0 & 0x0F;
        switch (op) {
            case 0x0: case 0x1: case 0x2: case 0x8: case 0x9: case 0xA: break;
            default: error_ = "unknown opcode"; return frames;
        }
        f.opcode = static_cast<Opcode>(op);
        f.payload = buf_.substr(header + mask_len, static_cast<std::size_t>(len));
        if (masked) {
            for (std::size_t i = 0; i < f.payload.size(); ++i) f.payload[i] ^= buf_[header + (i % 4)];
        }
        buf_.erase(0, total);
        frames.push_back(std::move(f));
    }
    return frames;
}

}  // namespace swabbot::ws
