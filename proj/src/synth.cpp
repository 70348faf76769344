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
#include "samp/synth.hpp"

#include "samp/car_shapes.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

namespace samp {

namespace fs = std::filesystem;
using nlohmann::json;

void ScenarioSpec::validate() const
{
    if (frames < 2) {
        throw InputError("scenario " + name + ": needs at least 2 frames");
    }
    if (!(dt > 0.0)) {
        throw InputError("scenario " + name + ": dt must be positive");
    }
    calib.validate();
    if (!(camera_height > 0.0)) {
        throw InputError("scenario " + name + ": camera height must be positive");
    }
    if (sigma_disp_px < 0.0 || seed_sigma_t < 0.0 || seed_sigma_yaw < 0.0 || clutter_density < 0.0 ||
        shape_sigma_scale < 0.0) {
        throw InputError("scenario " + name + ": noise levels and densities must be non-negative");
    }
    if (!(clutter_radius > 0.0) || clutter_band < 0.0) {
        throw InputError("scenario " + name + ": invalid clutter disc");
    }
    if (pixel_stride < 1) {
        throw InputError("scenario " + name + ": pixel stride must be >= 1");
    }
    for (int k : occluded_frames) {
        if (k < 0 || k >= frames) {
            throw InputError("scenario " + name + ": occluded frame " + std::to_string(k) + " out of range");
        }
    }
}

// --- scenario JSON ------------------------------------------------------------------

namespace {

json scenario_json(const ScenarioSpec& s)
{
    json j;
    j["name"] = s.name;
    if (s.shape_code) {
        j["shape_code"] = *s.shape_code;
    }
    j["shape_sigma_scale"] = s.shape_sigma_scale;
    j["regime"] = to_string(s.regime);
    j["speed"] = s.speed;
    j["yaw_rate"] = s.yaw_rate;
    j["frames"] = s.frames;
    j["dt"] = s.dt;
    j["start_x"] = s.start_x;
    j["start_z"] = s.start_z;
    j["heading"] = s.heading;
    j["calib"] = {{"f_px", s.calib.f_px}, {"b_m", s.calib.b_m}, {"sigma_disp_px", s.calib.sigma_disp_px},
                  {"cx", s.calib.cx},     {"cy", s.calib.cy},   {"width", s.calib.width},
                  {"height", s.calib.height}};
    j["camera_height"] = s.camera_height;
    j["ego_speed"] = s.ego_speed;
    j["sigma_disp_px"] = s.sigma_disp_px;
    j["seed_sigma_t"] = s.seed_sigma_t;
    j["seed_sigma_yaw"] = s.seed_sigma_yaw;
    j["seed_bias_forward"] = s.seed_bias_forward;
    j["seed_bias_lateral"] = s.seed_bias_lateral;
    j["seed_bias_yaw"] = s.seed_bias_yaw;
    j["clutter_density"] = s.clutter_density;
    j["clutter_radius"] = s.clutter_radius;
    j["clutter_band"] = s.clutter_band;
    j["occluded_frames"] = s.occluded_frames;
    j["pixel_stride"] = s.pixel_stride;
    j["seed"] = s.seed;
    return j;
}

template <typename T>
void read_opt(const json& j, const char* key, T& out)
{
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

ScenarioSpec scenario_from_json(const json& j)
{
    ScenarioSpec s;
    read_opt(j, "name", s.name);
    if (j.contains("shape_code")) {
        s.shape_code = j.at("shape_code").get<std::vector<double>>();
    }
    read_opt(j, "shape_sigma_scale", s.shape_sigma_scale);
    if (j.contains("regime")) {
        s.regime = regime_from_string(j.at("regime").get<std::string>());
    }
    read_opt(j, "speed", s.speed);
    read_opt(j, "yaw_rate", s.yaw_rate);
    read_opt(j, "frames", s.frames);
    read_opt(j, "dt", s.dt);
    read_opt(j, "start_x", s.start_x);
    read_opt(j, "start_z", s.start_z);
    read_opt(j, "heading", s.heading);
    if (j.contains("calib")) {
        const json& c = j.at("calib");
        read_opt(c, "f_px", s.calib.f_px);
        read_opt(c, "b_m", s.calib.b_m);
        read_opt(c, "sigma_disp_px", s.calib.sigma_disp_px);
        read_opt(c, "cx", s.calib.cx);
        read_opt(c, "cy", s.calib.cy);
        read_opt(c, "width", s.calib.width);
        read_opt(c, "height", s.calib.height);
    }
    read_opt(j, "camera_height", s.camera_height);
    read_opt(j, "ego_speed", s.ego_speed);
    read_opt(j, "sigma_disp_px", s.sigma_disp_px);
    read_opt(j, "seed_sigma_t", s.seed_sigma_t);
    read_opt(j, "seed_sigma_yaw", s.seed_sigma_yaw);
    read_opt(j, "seed_bias_forward", s.seed_bias_forward);
    read_opt(j, "seed_bias_lateral", s.seed_bias_lateral);
    read_opt(j, "seed_bias_yaw", s.seed_bias_yaw);
    read_opt(j, "clutter_density", s.clutter_density);
    read_opt(j, "clutter_radius", s.clutter_radius);
    read_opt(j, "clutter_band", s.clutter_band);
    read_opt(j, "occluded_frames", s.occluded_frames);
    read_opt(j, "pixel_stride", s.pixel_stride);
    read_opt(j, "seed", s.seed);
    s.validate();
    return s;
}

json pose_json(const Pose& p)
{
    return {{"t", {p.t.x(), p.t.y(), p.t.z()}}, {"theta", p.theta}, {"v", p.v}, {"omega", p.omega}};
}

Pose pose_from_json(const json& j)
{
    Pose p;
    const auto t = j.at("t").get<std::vector<double>>();
    if (t.size() != 3) {
        throw InputError("pose translation must have 3 entries");
    }
    p.t = Vec3(t[0], t[1], t[2]);
    p.theta = j.at("theta").get<double>();
    p.v = j.at("v").get<double>();
    p.omega = j.at("omega").get<double>();
    return p;
}

std::mt19937_64 frame_rng(std::uint64_t seed, int frame, std::uint32_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(frame), stream};
    return std::mt19937_64(seq);
}

} // namespace

ScenarioSpec scenario_from_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open scenario file " + path);
    }
    try {
        return scenario_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_scenario_json(const std::string& path, const ScenarioSpec& spec)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write scenario file " + path);
    }
    out << scenario_json(spec).dump(2) << '\n';
}

// --- generation ---------------------------------------------------------------------

Scene generate(const ScenarioSpec& spec, const ShapeManifold& manifold)
{
    spec.validate();
    const int R = manifold.dim();

    ShapeCode z(R);
    if (spec.shape_code) {
        if (static_cast<int>(spec.shape_code->size()) != R) {
            throw InputError("scenario " + spec.name + ": shape code has " + std::to_string(spec.shape_code->size()) +
                             " entries, manifold dimension is " + std::to_string(R));
        }
        z = Eigen::Map<const Eigen::VectorXd>(spec.shape_code->data(), R);
    } else {
        std::mt19937_64 rng = frame_rng(spec.seed, -1, 0);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int i = 0; i < R; ++i) {
            z[i] = spec.shape_sigma_scale * std::sqrt(manifold.eigenvalues()[i]) * u(rng);
        }
    }
    const DecodedShape shape(manifold, z);

    const double elevation = spec.camera_height;
    Eigen::Vector4d plane_coeffs(0.0, 1.0, 0.0, -elevation);
    const GroundPlane plane = GroundPlane::from_coefficients(plane_coeffs, 0.05 * 0.05);

    Scene scene;
    scene.truth.z = z;
    scene.truth.eval_frame = spec.frames / 2;
    scene.truth.scenario = spec.name;
    Track& track = scene.track;
    track.id = spec.name;
    track.calib = spec.calib;

    const bool moving = spec.regime != MotionRegime::kStanding;
    Pose pose;
    pose.t = Vec3(spec.start_x, elevation, spec.start_z);
    pose.theta = wrap_angle(spec.heading);
    pose.v = moving ? spec.speed : 0.0;
    pose.omega = spec.regime == MotionRegime::kTurning ? spec.yaw_rate : 0.0;

    const Intrinsics camera = spec.calib.intrinsics();
    const double bf = spec.calib.b_m * spec.calib.f_px;
    for (int k = 0; k < spec.frames; ++k) {
        // Step by the same timestamp difference the track reports, so the truth is exact.
        if (k > 0) {
            pose = predict(pose, k * spec.dt - (k - 1) * spec.dt, spec.regime);
        }
        scene.truth.poses.push_back(pose);

        Frame f;
        f.index = k;
        f.timestamp = k * spec.dt;
        f.cloud = "clouds/frame_" + [k] {
            std::ostringstream os;
            os << std::setw(3) << std::setfill('0') << k;
            return os.str();
        }() + ".xyz";
        f.camera_to_world = Eigen::Isometry3d::Identity();
        f.camera_to_world.translation() = Vec3(0.0, 0.0, spec.ego_speed * f.timestamp);
        f.plane = plane;
        f.plane_given = true;
        std::vector<std::uint8_t> mask;

        const bool occluded =
            std::find(spec.occluded_frames.begin(), spec.occluded_frames.end(), k) != spec.occluded_frames.end();
        if (!occluded) {
            std::mt19937_64 rng = frame_rng(spec.seed, k, 1);
            std::normal_distribution<double> noise(0.0, 1.0);
            const Eigen::Isometry3d object_to_camera = f.camera_to_world.inverse() * pose.object_to_world();
            const DepthMap map = render_depth(shape, camera, object_to_camera, {}, spec.pixel_stride);
            for (int v = 0; v < map.height; ++v) {
                for (int u = 0; u < map.width; ++u) {
                    if (!map.is_valid(u, v)) {
                        continue;
                    }
                    double d = map.at(u, v);
                    if (spec.sigma_disp_px > 0.0) {
                        const double disparity = bf / d + spec.sigma_disp_px * noise(rng);
                        if (!(disparity > 0.0)) {
                            continue;
                        }
                        d = bf / disparity;
                    }
                    f.pool.push_back(f.camera_to_world * backproject(camera, u, v, d));
                    mask.push_back(1);
                }
            }
            if (f.pool.empty()) {
                throw InputError("scenario " + spec.name + ": object not visible in frame " + std::to_string(k));
            }
        }

        if (spec.clutter_density > 0.0) {
            std::mt19937_64 rng = frame_rng(spec.seed, k, 2);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const double area = std::numbers::pi * spec.clutter_radius * spec.clutter_radius;
            const auto count = static_cast<int>(std::lround(spec.clutter_density * area));
            const Vec3 cam = f.camera_position();
            for (int i = 0; i < count; ++i) {
                const double r = spec.clutter_radius * std::sqrt(unit(rng));
                const double a = 2.0 * std::numbers::pi * unit(rng);
                const double y = elevation + spec.clutter_band * (2.0 * unit(rng) - 1.0);
                const Vec3 p(pose.t.x() + r * std::cos(a), y, pose.t.z() + r * std::sin(a));
                if (p.z() - cam.z() < 0.5) {
                    continue;
                }
                f.pool.push_back(p);
                mask.push_back(0);
            }
        }
        update_depths(f);

        std::mt19937_64 rng = frame_rng(spec.seed, k, 3);
        std::normal_distribution<double> noise(0.0, 1.0);
        const Vec3 forward(-std::sin(pose.theta), 0.0, -std::cos(pose.theta));
        const Vec3 lateral(std::cos(pose.theta), 0.0, -std::sin(pose.theta));
        f.detection.center = pose.t + spec.seed_bias_forward * forward + spec.seed_bias_lateral * lateral;
        f.detection.center.x() += spec.seed_sigma_t * noise(rng);
        f.detection.center.z() += spec.seed_sigma_t * noise(rng);
        f.detection.yaw = wrap_angle(pose.theta + spec.seed_bias_yaw + spec.seed_sigma_yaw * noise(rng));
        f.detection.size = Vec3(1.75, 1.5, 4.4);
        f.detection.score = 1.0;

        track.frames.push_back(std::move(f));
        scene.truth.surface_masks.push_back(std::move(mask));
    }
    track.validate();
    return scene;
}

void write_ground_truth(const std::string& path, const GroundTruth& truth)
{
    json j;
    j["scenario"] = truth.scenario;
    j["z"] = std::vector<double>(truth.z.data(), truth.z.data() + truth.z.size());
    json poses = json::array();
    for (const Pose& p : truth.poses) {
        poses.push_back(pose_json(p));
    }
    j["poses"] = poses;
    j["eval_frame"] = truth.eval_frame;
    j["surface_masks"] = truth.surface_masks;
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write ground-truth file " + path);
    }
    out << j.dump() << '\n';
}

GroundTruth read_ground_truth(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open ground-truth file " + path);
    }
    GroundTruth gt;
    try {
        const json j = json::parse(in);
        gt.scenario = j.value("scenario", "");
        const auto z = j.at("z").get<std::vector<double>>();
        gt.z = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
        for (const auto& p : j.at("poses")) {
            gt.poses.push_back(pose_from_json(p));
        }
        gt.eval_frame = j.at("eval_frame").get<int>();
        gt.surface_masks = j.at("surface_masks").get<std::vector<std::vector<std::uint8_t>>>();
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    if (gt.poses.size() < 2 || gt.eval_frame < 0 || gt.eval_frame >= static_cast<int>(gt.poses.size())) {
        throw InputError(path + ": inconsistent ground truth");
    }
    return gt;
}

void write_scene(const Scene& scene, const std::string& dir)
{
    fs::create_directories(fs::path(dir) / "clouds");
    save_track(scene.track, (fs::path(dir) / "track.json").string());
    write_ground_truth((fs::path(dir) / "gt.json").string(), scene.truth);
}

// --- presets ------------------------------------------------------------------------

std::vector<ScenarioSpec> preset_suite()
{
    std::vector<ScenarioSpec> out;

    ScenarioSpec straight;
    straight.name = "straight-20-frames";
    straight.regime = MotionRegime::kStraight;
    straight.speed = 8.0;
    straight.start_x = 3.0;
    straight.start_z = 12.0;
    straight.heading = std::numbers::pi - 0.15;
    straight.ego_speed = 5.0;
    straight.pixel_stride = 2;
    out.push_back(straight);

    ScenarioSpec turn;
    turn.name = "turn-20-frames";
    turn.regime = MotionRegime::kTurning;
    turn.speed = 6.0;
    turn.yaw_rate = 0.3;
    turn.start_x = -2.0;
    turn.start_z = 13.0;
    turn.heading = std::numbers::pi;
    turn.ego_speed = 3.0;
    turn.pixel_stride = 2;
    out.push_back(turn);

    ScenarioSpec parked;
    parked.name = "static-20-frames";
    parked.regime = MotionRegime::kStanding;
    parked.speed = 0.0;
    parked.start_x = 4.0;
    parked.start_z = 16.0;
    parked.heading = 2.4;
    parked.ego_speed = 4.0;
    parked.pixel_stride = 2;
    out.push_back(parked);

    ScenarioSpec occluded = straight;
    occluded.name = "occluded-mid-track";
    occluded.occluded_frames = {8, 9, 10};
    out.push_back(occluded);

    ScenarioSpec far;
    far.name = "far-range";
    far.regime = MotionRegime::kStraight;
    far.speed = 10.0;
    far.start_x = 2.5;
    far.start_z = 41.0;
    far.heading = std::numbers::pi;
    far.sigma_disp_px = 1.0;
    far.seed_sigma_t = 1.0;
    far.seed_sigma_yaw = 10.0 * std::numbers::pi / 180.0;
    out.push_back(far);

    ScenarioSpec em = straight;
    em.name = "biased-seeds-clutter";
    em.seed_bias_forward = 1.0;
    em.clutter_density = 20.0;
    out.push_back(em);

    ScenarioSpec one_sided;
    one_sided.name = "one-sided";
    one_sided.regime = MotionRegime::kStanding;
    one_sided.speed = 0.0;
    one_sided.start_x = 5.0;
    one_sided.start_z = 12.0;
    one_sided.heading = std::numbers::pi / 2.0;
    one_sided.shape_sigma_scale = 1.0;
    one_sided.calib.sigma_disp_px = 1e-3;
    one_sided.pixel_stride = 2;
    out.push_back(one_sided);
    return out;
}

std::vector<std::string> preset_names()
{
    std::vector<std::string> names;
    for (const auto& s : preset_suite()) {
        names.push_back(s.name);
    }
    return names;
}

ScenarioSpec preset(const std::string& name)
{
    std::string known;
    for (const auto& s : preset_suite()) {
        if (s.name == name) {
            return s;
        }
        known += (known.empty() ? "" : ", ") + s.name;
    }
    throw InputError("unknown preset '" + name + "' (known: " + known + ")");
}

std::vector<SdfGrid> car_training_grids(int count, const GridSpec& spec, std::uint64_t seed)
{
    if (count < 1) {
        throw InputError("need at least one training car");
    }
    std::vector<SdfGrid> grids;
    for (int i = 0; i < count; ++i) {
        const CarParams car = random_car(seed + static_cast<std::uint64_t>(i));
        const PointCloud surface = sample_car_surface(car, 0.5 * spec.voxel_size);
        grids.push_back(build_sdf_from_points(surface.points, spec, [&car](const Vec3& p) { return car.contains(p); }));
    }
    return grids;
}

ShapeManifold default_car_manifold()
{
    return ShapeManifold::train(car_training_grids(12, GridSpec::vehicle_default(), 100), 5);
}

} // namespace samp
