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
#include "samp/motion.hpp"
#include "samp/sdf_grid.hpp"

#include <string>
#include <vector>

namespace samp {

/// Stereo rig calibration plus the image geometry used for rendering.
struct Calibration {
    double f_px = 721.0;
    double b_m = 0.54;
    double sigma_disp_px = 1.0;
    double cx = 621.0;
    double cy = 187.5;
    int width = 1242;
    int height = 375;

    Intrinsics intrinsics() const { return {f_px, cx, cy, width, height}; }
    void validate() const;
};

/// A 3D vehicle detection; `center` is the ground-contact point (bottom center of the box).
struct Detection {
    Vec3 center = Vec3::Zero();
    double yaw = 0.0;
    Vec3 size{1.8, 1.5, 4.5}; ///< width, height, length
    double score = 1.0;
};

struct Frame {
    int index = 0;
    double timestamp = 0.0;
    std::string cloud; ///< point-cloud path as written in the track file
    Points pool;                ///< every candidate point (world frame)
    std::vector<double> depth;  ///< camera-frame depth of each pool point
    std::vector<std::size_t> observed; ///< current association: indices into `pool`
    Detection detection;
    GroundPlane plane;
    bool plane_given = false; ///< plane came from the file rather than estimation
    Eigen::Isometry3d camera_to_world = Eigen::Isometry3d::Identity();

    bool observation_free() const { return observed.empty(); }
    Vec3 camera_position() const { return camera_to_world.translation(); }
};

struct Track {
    std::string id;
    Calibration calib;
    std::vector<Frame> frames;

    int size() const { return static_cast<int>(frames.size()); }
    /// Time step into frame t (t >= 1).
    double dt(int t) const { return frames[t].timestamp - frames[t - 1].timestamp; }
    std::vector<std::vector<std::size_t>> association() const;
    /// Throws InputError when an invariant is violated.
    void validate() const;
};

/// Computes per-point camera depths from the frame's camera pose.
void update_depths(Frame& frame);

/// Loads and validates a track JSON file; point-cloud paths resolve relative to the file.
/// Frames without a "plane" get one estimated from ground candidates in their cloud.
Track load_track(const std::string& path, const GroundPlaneSettings& plane_settings = {});

/// Writes the track JSON and one ASCII cloud per frame next to it. Frames with an empty
/// `cloud` get "<stem>_frame_<index>.xyz".
void save_track(const Track& track, const std::string& path);

} // namespace samp
