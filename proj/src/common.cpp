/*
 * Copyright 2026 The samp Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "samp/common.hpp"

#include <cstdlib>
#include <string_view>

namespace samp {

LogLevel log_level()
{
    static const LogLevel level = [] {
        const char* env = std::getenv("SAMP_LOG");
        if (env == nullptr) {
            return LogLevel::kQuiet;
        }
        const std::string_view v(env);
        if (v == "2" || v == "debug") {
            return LogLevel::kDebug;
        }
        if (v == "1" || v == "info") {
            return LogLevel::kInfo;
        }
        return LogLevel::kQuiet;
    }();
    return level;
}

} // namespace samp
