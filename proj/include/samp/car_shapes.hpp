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

#include "samp/common.hpp"
#include "samp/point_cloud.hpp"

#include <cstdint>
#include <vector>

namespace samp {

/// Side-profile parameters of a box-plus-cabin car, extruded across its width.
/// All lengths in meters; the car is centered at x = z = 0 with its wheels on y = 0.
struct CarParams {
    double length = 4.4;
    double width = 1.75;
    double height = 1.5;       ///< roof height above ground
    double clearance = 0.2;    ///< underbody height above ground
    double body_height = 0.65; ///< beltline height above the underbody
    double bumper_height = 0.45;
    double hood_length = 1.1;
    double windshield_length = 0.7;
    double rear_window_length = 0.5;
    double trunk_length = 0.8;

    /// Side-profile polygon (z, y) in counter-clockwise order in the (z, y) plane.
    std::vector<Eigen::Vector2d> profile() const;
    /// Inside test for the extruded solid.
    bool contains(const Vec3& p) const;
};

/// Randomized but plausible parameters; deterministic for a fixed seed.
CarParams random_car(std::uint64_t seed);

/// Oriented surface samples of the car at roughly `spacing` meters.
PointCloud sample_car_surface(const CarParams& car, double spacing);

} // namespace samp
