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

#include "swabbot/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace swabbot {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, std::string_view origin) {
    KeyValueConfig cfg;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(std::string(line), std::string(origin) + ":" + std::to_string(line_no) +
                                                     ": expected 'key = value', got '" + std::string(line) + "'");
        }
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("", std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
        }
        if (cfg.contains(key)) {
            throw ConfigError(std::string(key), std::string(origin) + ":" + std::to_string(line_no) +
                                                    ": duplicate key '" + std::string(key) + "'");
        }
        cfg.entries_.emplace(std::string(key), std::string(value));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

bool KeyValueConfig::contains(std::string_view key) const { return entries_.find(key) != entries_.end(); }

void KeyValueConfig::set(std::string key, std::string value) { entries_[std::move(key)] = std::move(value); }

const std::string* KeyValueConfig::lookup(std::string_view key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    consumed_.emplace(key);
    return &it->second;
}

std::optional<double> KeyValueConfig::find_double(std::string_view key) const {
    const auto* raw = lookup(key);
    if (raw == nullptr) return std::nullopt;
    double v = 0.0;
    const auto* end = raw->data() + raw->size();
    auto [ptr, ec] = std::from_chars(raw->data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw ConfigError(std::string(key), "bad value for '" + std::string(key) + "': expected a number, got '" +
                                                *raw + "'");
    }
    return v;
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const {
    return find_double(key).value_or(fallback);
}

std::int64_t KeyValueConfig::get_int(std::string_view key, std::int64_t fallback) const {
    const auto* raw = lookup(key);
    if (raw == nullptr) return fallback;
    std::int64_t v = 0;
    const auto* end = raw->data() + raw->size();
    auto [ptr, ec] = std::from_chars(raw->data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(std::string(key), "bad value for '" + std::string(key) + "': expected an integer, got '" +
                                                *raw + "'");
    }
    return v;
}

std::string KeyValueConfig::get_string(std::string_view key, std::string fallback) const {
    const auto* raw = lookup(key);
    return raw == nullptr ? std::move(fallback) : *raw;
}

void KeyValueConfig::reject_unconsumed() const {
    for (const auto& [key, value] : entries_) {
        if (consumed_.find(key) == consumed_.end()) {
            throw ConfigError(key, "unknown config key '" + key + "'");
        }
    }
}

std::string KeyValueConfig::to_string() const {
    std::string out;
    for (const auto& [key, value] : entries_) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    }
    return out;
}

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

}  // namespace swabbot
