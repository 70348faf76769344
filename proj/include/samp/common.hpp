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
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace samp {

using Vec3 = Eigen::Vector3d;
using Points = std::vector<Vec3>;

/// Malformed or inconsistent input (bad files, violated preconditions). Maps to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure while computing (non-finite energy, render failures). Maps to exit code 1.
class ComputeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a)
{
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    if (a > -std::numbers::pi && a <= std::numbers::pi) {
        return a;
    }
    a = std::fmod(a + std::numbers::pi, kTwoPi);
    if (a <= 0.0) {
        a += kTwoPi;
    }
    return a - std::numbers::pi;
}

enum class LogLevel { kQuiet = 0, kInfo = 1, kDebug = 2 };

/// Verbosity from the SAMP_LOG environment variable ("0"/"quiet", "1"/"info", "2"/"debug").
LogLevel log_level();

template <typename... Args>
void log(LogLevel level, const Args&... args)
{
    if (static_cast<int>(level) > static_cast<int>(log_level())) {
        return;
    }
    std::ostringstream os;
    os << "[samp] ";
    (os << ... << args);
    os << '\n';
    std::cerr << os.str();
}

template <typename... Args>
void warn(const Args&... args)
{
    std::ostringstream os;
    os << "[samp] warning: ";
    (os << ... << args);
    os << '\n';
    std::cerr << os.str();
}

} // namespace samp
