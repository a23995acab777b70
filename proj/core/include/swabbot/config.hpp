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
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

namespace swabbot {

/// Raised for unreadable files, malformed lines, bad values and unknown keys.
/// `key()` names the offending key when there is one.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Flat `key = value` store. Lines starting with '#' are comments.
///
/// Every typed getter marks its key as consumed; `reject_unconsumed()` then
/// reports the first key nobody asked for, which is how typos surface.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(std::string_view text, std::string_view origin = "<string>");
    static KeyValueConfig load(const std::filesystem::path& path);

    bool contains(std::string_view key) const;
    void set(std::string key, std::string value);

    double get_double(std::string_view key, double fallback) const;
    std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
    std::string get_string(std::string_view key, std::string fallback) const;
    std::optional<double> find_double(std::string_view key) const;

    void reject_unconsumed() const;

    const std::map<std::string, std::string, std::less<>>& entries() const { return entries_; }

    /// Serializes in key order; doubles should already be formatted by the caller.
    std::string to_string() const;

private:
    const std::string* lookup(std::string_view key) const;

    std::map<std::string, std::string, std::less<>> entries_;
    mutable std::set<std::string, std::less<>> consumed_;
};

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

}  // namespace swabbot
