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

#include <string>

#include "generators.hpp"

namespace swabbot::testing {

/// One to four byte-level edits: overwrite, insert, delete, truncate, or a
/// numeric-looking character.
inline std::string mutate(Gen& g, std::string s) {
    const int edits = static_cast<int>(g.integer(1, 4));
    for (int i = 0; i < edits; ++i) {
        const auto pos = static_cast<std::size_t>(g.integer(0, static_cast<std::int64_t>(s.size())));
        switch (g.integer(0, 4)) {
            case 0:
                if (pos < s.size()) s[pos] = static_cast<char>(g.integer(0, 255));
                break;
            case 1: s.insert(pos, 1, static_cast<char>(g.integer(0x20, 0x7e))); break;
            case 2:
                if (pos < s.size()) s.erase(pos, 1);
                break;
            case 3: s.resize(pos); break;
            default:
                if (pos < s.size()) s[pos] = " -.0123456789eEnN"[g.integer(0, 16)];
                break;
        }
    }
    return s;
}

}  // namespace swabbot::testing
