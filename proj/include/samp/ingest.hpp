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

#include "samp/motion.hpp"
#include "samp/shape_manifold.hpp"
#include "samp/track.hpp"

#include <span>
#include <vector>

namespace samp {

inline constexpr double kDefaultAssociationRadius = 3.0;

/// Indices of pool points above the frame's road plane and within `radius` of `center`.
std::vector<std::size_t> filter_observations(const Frame& frame, const Vec3& center,
                                             double radius = kDefaultAssociationRadius);
/// Same, centered on the frame's detection.
std::vector<std::size_t> filter_observations(const Frame& frame, double radius = kDefaultAssociationRadius);

/// Sets every frame's association from its detection.
void associate_detections(Track& track, double radius = kDefaultAssociationRadius);

struct Initialization {
    ShapeCode z;
    std::vector<Pose> poses;
    MotionRegime regime = MotionRegime::kStanding;
};

/// Mean shape; translations at the detections dropped onto the road plane; speed and yaw
/// rate from the lower medians of finite differences between successive detections.
/// Standing tracks keep each detection's yaw, moving tracks take the heading of the segment
/// from the first to the last detection.
Initialization initialize(const Track& track, const ShapeManifold& manifold, const RegimeThresholds& thresholds = {});

/// Lower median (element n/2 - 1 for even n, n/2 for odd n).
double lower_median(std::vector<double> values);

/// Re-runs the association around the given per-frame poses.
Track reassociate(const Track& track, std::span<const Pose> poses, double radius = kDefaultAssociationRadius);

} // namespace samp
