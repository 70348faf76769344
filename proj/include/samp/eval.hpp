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

#include <cstdint>
#include <string>
#include <vector>

namespace samp {

struct ShapeScore {
    double completeness = 0.0; ///< % of ground-truth points with a reconstructed point within tau
    double accuracy = 0.0;     ///< % of reconstructed points with a ground-truth point within tau
    double f1 = 0.0;           ///< %
    double tau = 0.2;          ///< m
    std::size_t gt_count = 0;
    std::size_t reconstructed_count = 0;
    bool empty = false;        ///< one of the sets was empty; all scores are zero
};

/// Harmonic mean of two percentages; 0 when both are 0.
double f1_score(double accuracy, double completeness);

/// Nearest-neighbor threshold tests through a spatial hash with cell size tau.
ShapeScore shape_score(const Points& gt_points, const Points& reconstructed_points, double tau = 0.2);

/// Pixels where the shape at `pose` renders a valid depth in the frame's camera.
std::vector<std::uint8_t> render_mask(const ShapeManifold& manifold, const ShapeCode& z, const Pose& pose,
                                      const Frame& frame, const Intrinsics& camera, int stride = 1);

/// World points of the shape rendered at `pose` in the frame's camera, restricted to `mask`
/// when given. `empty` is set when nothing survives.
Points reconstructed_points(const ShapeManifold& manifold, const ShapeCode& z, const Pose& pose, const Frame& frame,
                            const Intrinsics& camera, const std::vector<std::uint8_t>* mask = nullptr,
                            int stride = 1, bool* empty = nullptr);

/// Zero level set of the decoded shape sampled by ray casting, mapped into the world.
Points surface_points_world(const ShapeManifold& manifold, const ShapeCode& z, const Pose& pose, int ray_count,
                            std::uint64_t seed = 0);

struct DistanceBin {
    double lower = 0.0; ///< m, inclusive
    double upper = 0.0; ///< m, exclusive
    std::size_t count = 0;
    double rotation_mean = 0.0;
    double rotation_median = 0.0;
    double translation_mean = 0.0;
    double translation_median = 0.0;
};

struct PoseScore {
    std::vector<double> rotation_error;    ///< rad, wrapped |yaw difference|
    std::vector<double> translation_error; ///< m
    std::vector<double> distance;          ///< m, ground-truth object to camera
    std::vector<DistanceBin> bins;         ///< fixed 20 m windows from 0 to the farthest frame; empty bins hold NaN
};

PoseScore pose_score(const std::vector<Pose>& estimated, const std::vector<Pose>& truth,
                     const std::vector<Vec3>& camera_positions, double bin_width = 20.0);

/// Conventional median (mean of the two middle elements for even counts).
double median(std::vector<double> values);

struct EvalReport {
    std::string track_id;
    std::vector<ShapeScore> shape;
    PoseScore pose;
};

void write_eval_json(const std::string& path, const EvalReport& report);
/// One row per tau.
void write_eval_csv(const std::string& path, const EvalReport& report);
/// Two whitespace-separated blocks: the tau sweep, then the distance bins.
void write_eval_gnuplot(const std::string& path, const EvalReport& report);

} // namespace samp
