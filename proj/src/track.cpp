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
#include "samp/track.hpp"

#include "samp/point_cloud.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace samp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& file, const std::string& field, const std::string& what)
{
    throw InputError(file + ": " + field + ": " + what);
}

double get_number(const json& j, const std::string& key, const std::string& file, const std::string& where)
{
    if (!j.contains(key)) {
        field_error(file, where + "." + key, "missing");
    }
    const json& v = j.at(key);
    if (!v.is_number()) {
        field_error(file, where + "." + key, "expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        field_error(file, where + "." + key, "not finite");
    }
    return x;
}

std::vector<double> get_array(const json& j, const std::string& key, std::size_t n, const std::string& file,
                              const std::string& where)
{
    if (!j.contains(key)) {
        field_error(file, where + "." + key, "missing");
    }
    const json& v = j.at(key);
    if (!v.is_array() || v.size() != n) {
        field_error(file, where + "." + key, "expected an array of " + std::to_string(n) + " numbers");
    }
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number() || !std::isfinite(e.get<double>())) {
            field_error(file, where + "." + key, "expected an array of " + std::to_string(n) + " finite numbers");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

} // namespace

void Calibration::validate() const
{
    if (!(f_px > 0.0) || !(b_m > 0.0) || !(sigma_disp_px > 0.0)) {
        throw InputError("calibration: f_px, b_m and sigma_disp_px must be positive");
    }
    if (width <= 0 || height <= 0) {
        throw InputError("calibration: image size must be positive");
    }
}

std::vector<std::vector<std::size_t>> Track::association() const
{
    std::vector<std::vector<std::size_t>> out;
    out.reserve(frames.size());
    for (const auto& f : frames) {
        out.push_back(f.observed);
    }
    return out;
}

void Track::validate() const
{
    calib.validate();
    if (frames.size() < 2) {
        throw InputError("track " + id + ": needs at least 2 frames");
    }
    std::set<int> seen;
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const Frame& f = frames[t];
        const std::string name = "track " + id + " frame " + std::to_string(f.index);
        if (!seen.insert(f.index).second) {
            throw InputError("track " + id + ": duplicate frame index " + std::to_string(f.index));
        }
        if (t > 0 && !(f.timestamp > frames[t - 1].timestamp)) {
            throw InputError(name + ": timestamps must be strictly increasing");
        }
        if (f.depth.size() != f.pool.size()) {
            throw InputError(name + ": depth list does not match the point count");
        }
        for (std::size_t i = 0; i < f.pool.size(); ++i) {
            if (!f.pool[i].allFinite()) {
                throw InputError(name + ": point " + std::to_string(i) + " is not finite");
            }
            if (!(f.depth[i] > 0.0)) {
                throw InputError(name + ": point " + std::to_string(i) + " has non-positive depth");
            }
        }
        for (std::size_t i : f.observed) {
            if (i >= f.pool.size()) {
                throw InputError(name + ": association index out of range");
            }
        }
        const Detection& d = f.detection;
        if (!d.center.allFinite() || !std::isfinite(d.yaw)) {
            throw InputError(name + ": detection is not finite");
        }
        if (!(d.size.minCoeff() > 0.0)) {
            throw InputError(name + ": detection size must be positive");
        }
        if (!(d.score >= 0.0 && d.score <= 1.0)) {
            throw InputError(name + ": detection score must lie in [0, 1]");
        }
    }
}

void update_depths(Frame& frame)
{
    const Eigen::Isometry3d world_to_camera = frame.camera_to_world.inverse();
    frame.depth.resize(frame.pool.size());
    for (std::size_t i = 0; i < frame.pool.size(); ++i) {
        frame.depth[i] = (world_to_camera * frame.pool[i]).z();
    }
}

Track load_track(const std::string& path, const GroundPlaneSettings& plane_settings)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open track file " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
    if (!j.is_object()) {
        throw InputError(path + ": expected a JSON object");
    }
    const fs::path dir = fs::path(path).parent_path();

    Track track;
    track.id = j.value("id", fs::path(path).stem().string());
    if (!j.contains("calib") || !j["calib"].is_object()) {
        field_error(path, "calib", "missing");
    }
    const json& c = j["calib"];
    track.calib.f_px = get_number(c, "f_px", path, "calib");
    track.calib.b_m = get_number(c, "b_m", path, "calib");
    track.calib.sigma_disp_px = get_number(c, "sigma_disp_px", path, "calib");
    if (c.contains("cx")) track.calib.cx = get_number(c, "cx", path, "calib");
    if (c.contains("cy")) track.calib.cy = get_number(c, "cy", path, "calib");
    if (c.contains("width")) track.calib.width = static_cast<int>(get_number(c, "width", path, "calib"));
    if (c.contains("height")) track.calib.height = static_cast<int>(get_number(c, "height", path, "calib"));

    if (!j.contains("frames") || !j["frames"].is_array()) {
        field_error(path, "frames", "missing or not an array");
    }
    const json& frames = j["frames"];
    for (std::size_t t = 0; t < frames.size(); ++t) {
        const json& fj = frames[t];
        const std::string where = "frames[" + std::to_string(t) + "]";
        if (!fj.is_object()) {
            field_error(path, where, "expected an object");
        }
        Frame f;
        f.index = fj.contains("index") ? static_cast<int>(get_number(fj, "index", path, where)) : static_cast<int>(t);
        f.timestamp = fj.contains("t_s") ? get_number(fj, "t_s", path, where) : 0.1 * f.index;
        if (!fj.contains("cloud") || !fj["cloud"].is_string()) {
            field_error(path, where + ".cloud", "missing or not a string");
        }
        f.cloud = fj["cloud"].get<std::string>();
        if (fj.contains("camera_to_world")) {
            const auto m = get_array(fj, "camera_to_world", 12, path, where);
            Eigen::Matrix<double, 3, 4> pose;
            for (int r = 0; r < 3; ++r) {
                for (int k = 0; k < 4; ++k) {
                    pose(r, k) = m[static_cast<std::size_t>(4 * r + k)];
                }
            }
            f.camera_to_world.matrix().topRows<3>() = pose;
        }
        if (!fj.contains("detection") || !fj["detection"].is_object()) {
            field_error(path, where + ".detection", "missing");
        }
        const json& dj = fj["detection"];
        const std::string dwhere = where + ".detection";
        const auto center = get_array(dj, "center", 3, path, dwhere);
        const auto size = get_array(dj, "size", 3, path, dwhere);
        f.detection.center = Vec3(center[0], center[1], center[2]);
        f.detection.size = Vec3(size[0], size[1], size[2]);
        f.detection.yaw = get_number(dj, "yaw", path, dwhere);
        f.detection.score = dj.contains("score") ? get_number(dj, "score", path, dwhere) : 1.0;

        const fs::path cloud_path = fs::path(f.cloud).is_absolute() ? fs::path(f.cloud) : dir / f.cloud;
        try {
            f.pool = read_point_cloud(cloud_path.string()).points;
        } catch (const InputError& e) {
            throw InputError(path + ": " + where + ".cloud: " + e.what());
        }
        update_depths(f);

        if (fj.contains("plane")) {
            const auto p = get_array(fj, "plane", 4, path, where);
            const double var = fj.contains("plane_var") ? get_number(fj, "plane_var", path, where)
                                                        : plane_settings.variance_floor;
            try {
                f.plane = GroundPlane::from_coefficients(Eigen::Vector4d(p[0], p[1], p[2], p[3]), var);
            } catch (const InputError& e) {
                throw InputError(path + ": " + where + ".plane: " + e.what());
            }
            f.plane_given = true;
        } else {
            GroundPlaneSettings s = plane_settings;
            s.seed = plane_settings.seed + static_cast<std::uint64_t>(t);
            f.plane = fit_ground_plane(ground_candidates(f.pool, f.detection.center), s);
            if (f.plane.fallback) {
                warn("track ", track.id, " frame ", f.index, ": ground plane fallback (too few road points)");
            }
        }
        track.frames.push_back(std::move(f));
    }
    try {
        track.validate();
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
    return track;
}

void save_track(const Track& track, const std::string& path)
{
    const fs::path out_path(path);
    const fs::path dir = out_path.parent_path();
    if (!dir.empty()) {
        fs::create_directories(dir);
    }
    json j;
    j["id"] = track.id;
    j["calib"] = {{"f_px", track.calib.f_px},       {"b_m", track.calib.b_m},
                  {"sigma_disp_px", track.calib.sigma_disp_px},
                  {"cx", track.calib.cx},           {"cy", track.calib.cy},
                  {"width", track.calib.width},     {"height", track.calib.height}};
    json frames = json::array();
    for (const Frame& f : track.frames) {
        std::string cloud = f.cloud;
        if (cloud.empty() || fs::path(cloud).is_absolute()) {
            cloud = out_path.stem().string() + "_frame_" + std::to_string(f.index) + ".xyz";
        }
        const fs::path cloud_path = dir / cloud;
        fs::create_directories(cloud_path.parent_path().empty() ? fs::path(".") : cloud_path.parent_path());
        write_xyz(cloud_path.string(), PointCloud{f.pool, {}});

        json fj;
        fj["index"] = f.index;
        fj["t_s"] = f.timestamp;
        fj["cloud"] = cloud;
        fj["detection"] = {{"center", vec_json(f.detection.center)},
                           {"yaw", f.detection.yaw},
                           {"size", vec_json(f.detection.size)},
                           {"score", f.detection.score}};
        fj["plane"] = {f.plane.coeffs[0], f.plane.coeffs[1], f.plane.coeffs[2], f.plane.coeffs[3]};
        fj["plane_var"] = f.plane.variance;
        if (f.camera_to_world.matrix() != Eigen::Matrix4d::Identity()) {
            json m = json::array();
            for (int r = 0; r < 3; ++r) {
                for (int k = 0; k < 4; ++k) {
                    m.push_back(f.camera_to_world.matrix()(r, k));
                }
            }
            fj["camera_to_world"] = m;
        }
        frames.push_back(fj);
    }
    j["frames"] = frames;
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write track file " + path);
    }
    out << j.dump(2) << '\n';
}

} // namespace samp
