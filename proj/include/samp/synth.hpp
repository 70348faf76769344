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
#include <optional>
#include <string>
#include <vector>

namespace samp {

/// Parameters of one synthetic track.
struct ScenarioSpec {
    std::string name = "custom";

    /// Explicit shape code; otherwise each component is drawn uniformly within
    /// +-shape_sigma_scale standard deviations (0 gives the mean shape).
    std::optional<std::vector<double>> shape_code;
    double shape_sigma_scale = 0.0;

    MotionRegime regime = MotionRegime::kStraight;
    double speed = 8.0;    ///< m/s
    double yaw_rate = 0.0; ///< rad/s
    int frames = 20;
    double dt = 0.1;
    double start_x = 3.0;  ///< ground-contact position at the first frame (world)
    double start_z = 12.0;
    double heading = 3.141592653589793; ///< yaw at the first frame; pi drives away from the camera

    Calibration calib;     ///< written to the track; its sigma_disp_px is the declared noise
    double camera_height = 1.65;
    double ego_speed = 0.0; ///< camera moves along +z

    double sigma_disp_px = 0.0; ///< disparity noise actually applied

    double seed_sigma_t = 0.0;   ///< horizontal detection noise (m)
    double seed_sigma_yaw = 0.0; ///< detection yaw noise (rad)
    double seed_bias_forward = 0.0;
    double seed_bias_lateral = 0.0;
    double seed_bias_yaw = 0.0;

    double clutter_density = 0.0; ///< road points per m^2
    double clutter_radius = 10.0;
    double clutter_band = 0.02;

    std::vector<int> occluded_frames; ///< frames rendered without the object
    int pixel_stride = 1;
    std::uint64_t seed = 1;

    void validate() const;
};

ScenarioSpec scenario_from_json_file(const std::string& path);
void write_scenario_json(const std::string& path, const ScenarioSpec& spec);

struct GroundTruth {
    ShapeCode z;
    std::vector<Pose> poses;
    std::vector<std::vector<std::uint8_t>> surface_masks; ///< per frame, per pool point: lies on the object
    int eval_frame = 0;
    std::string scenario;
};

struct Scene {
    Track track;
    GroundTruth truth;
};

/// Renders the scenario: exact trajectory, per-frame depth maps of the decoded shape,
/// disparity-domain noise, road clutter and perturbed detection seeds.
Scene generate(const ScenarioSpec& spec, const ShapeManifold& manifold);

/// Writes `dir/track.json`, `dir/clouds/frame_NNN.xyz` and `dir/gt.json`.
void write_scene(const Scene& scene, const std::string& dir);

void write_ground_truth(const std::string& path, const GroundTruth& truth);
GroundTruth read_ground_truth(const std::string& path);

/// Shipped scenarios. The first five cover the motion regimes, occlusion and range;
/// the last two exercise reassociation and shape completion.
std::vector<ScenarioSpec> preset_suite();
std::vector<std::string> preset_names();
/// Throws InputError listing the known names.
ScenarioSpec preset(const std::string& name);

/// Truncated SDFs of randomized cars, built with their inside test.
std::vector<SdfGrid> car_training_grids(int count, const GridSpec& spec, std::uint64_t seed);

/// Manifold over 12 randomized cars on the default vehicle grid, 5 components.
ShapeManifold default_car_manifold();

} // namespace samp
