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
#include "samp/eval.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace samp {

using nlohmann::json;

double f1_score(double accuracy, double completeness)
{
    const double s = accuracy + completeness;
    return s > 0.0 ? 2.0 * accuracy * completeness / s : 0.0;
}

namespace {

struct CellKey {
    std::int64_t x, y, z;
    bool operator==(const CellKey&) const = default;
};

struct CellHash {
    std::size_t operator()(const CellKey& k) const
    {
        std::size_t h = static_cast<std::size_t>(k.x) * 73856093u;
        h ^= static_cast<std::size_t>(k.y) * 19349663u;
        h ^= static_cast<std::size_t>(k.z) * 83492791u;
        return h;
    }
};

class SpatialHash {
public:
    SpatialHash(const Points& points, double cell) : points_(points), cell_(cell)
    {
        for (std::size_t i = 0; i < points.size(); ++i) {
            cells_[key(points[i])].push_back(i);
        }
    }

    bool any_within(const Vec3& q, double radius) const
    {
        const CellKey c = key(q);
        const double r2 = radius * radius;
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                for (std::int64_t dx = -1; dx <= 1; ++dx) {
                    const auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
                    if (it == cells_.end()) {
                        continue;
                    }
                    for (std::size_t i : it->second) {
                        if ((points_[i] - q).squaredNorm() <= r2) {
                            return true;
                        }
                    }
                }
            }
        }
        return false;
    }

private:
    CellKey key(const Vec3& p) const
    {
        return {static_cast<std::int64_t>(std::floor(p.x() / cell_)), static_cast<std::int64_t>(std::floor(p.y() / cell_)),
                static_cast<std::int64_t>(std::floor(p.z() / cell_))};
    }

    const Points& points_;
    double cell_;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
};

double covered_percent(const Points& queries, const SpatialHash& hash, double tau)
{
    std::size_t hits = 0;
    for (const Vec3& q : queries) {
        hits += hash.any_within(q, tau) ? 1 : 0;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(queries.size());
}

} // namespace

ShapeScore shape_score(const Points& gt_points, const Points& reconstructed_points, double tau)
{
    if (!(tau > 0.0)) {
        throw InputError("tau must be positive");
    }
    ShapeScore s;
    s.tau = tau;
    s.gt_count = gt_points.size();
    s.reconstructed_count = reconstructed_points.size();
    if (gt_points.empty() || reconstructed_points.empty()) {
        s.empty = true;
        return s;
    }
    s.completeness = covered_percent(gt_points, SpatialHash(reconstructed_points, tau), tau);
    s.accuracy = covered_percent(reconstructed_points, SpatialHash(gt_points, tau), tau);
    s.f1 = f1_score(s.accuracy, s.completeness);
    return s;
}

std::vector<std::uint8_t> render_mask(const ShapeManifold& manifold, const ShapeCode& z, const Pose& pose,
                                      const Frame& frame, const Intrinsics& camera, int stride)
{
    const DecodedShape shape(manifold, z);
    const Eigen::Isometry3d object_to_camera = frame.camera_to_world.inverse() * pose.object_to_world();
    return render_depth(shape, camera, object_to_camera, {}, stride).valid;
}

Points reconstructed_points(const ShapeManifold& manifold, const ShapeCode& z, const Pose& pose, const Frame& frame,
                            const Intrinsics& camera, const std::vector<std::uint8_t>* mask, int stride, bool* empty)
{
    const DecodedShape shape(manifold, z);
    const Eigen::Isometry3d object_to_camera = frame.camera_to_world.inverse() * pose.object_to_world();
    const DepthMap map = render_depth(shape, camera, object_to_camera, {}, stride);
    Points points = depth_to_points(map, camera, mask);
    for (Vec3& p : points) {
        p = frame.camera_to_world * p;
    }
    if (empty != nullptr) {
        *empty = points.empty();
    }
    return points;
}

Points surface_points_world(const ShapeManifold& manifold, const ShapeCode& z, const Pose& pose, int ray_count,
                            std::uint64_t seed)
{
    const DecodedShape shape(manifold, z);
    Points points = extract_surface_points(shape, ray_count, seed);
    const Eigen::Isometry3d to_world = pose.object_to_world();
    for (Vec3& p : points) {
        p = to_world * p;
    }
    return points;
}

double median(std::vector<double> values)
{
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

PoseScore pose_score(const std::vector<Pose>& estimated, const std::vector<Pose>& truth,
                     const std::vector<Vec3>& camera_positions, double bin_width)
{
    if (estimated.size() != truth.size() || truth.size() != camera_positions.size()) {
        throw InputError("pose_score: estimated, ground-truth and camera lists differ in length");
    }
    if (!(bin_width > 0.0)) {
        throw InputError("pose_score: bin width must be positive");
    }
    PoseScore s;
    double far = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        s.rotation_error.push_back(std::abs(wrap_angle(estimated[i].theta - truth[i].theta)));
        s.translation_error.push_back((estimated[i].t - truth[i].t).norm());
        s.distance.push_back((truth[i].t - camera_positions[i]).norm());
        far = std::max(far, s.distance.back());
    }
    const auto nbins = static_cast<std::size_t>(std::floor(far / bin_width)) + 1;
    for (std::size_t b = 0; b < nbins; ++b) {
        DistanceBin bin;
        bin.lower = static_cast<double>(b) * bin_width;
        bin.upper = bin.lower + bin_width;
        std::vector<double> rot;
        std::vector<double> trans;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (s.distance[i] >= bin.lower && s.distance[i] < bin.upper) {
                rot.push_back(s.rotation_error[i]);
                trans.push_back(s.translation_error[i]);
            }
        }
        bin.count = rot.size();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const auto mean = [nan](const std::vector<double>& v) {
            return v.empty() ? nan : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        };
        bin.rotation_mean = mean(rot);
        bin.translation_mean = mean(trans);
        bin.rotation_median = median(rot);
        bin.translation_median = median(trans);
        s.bins.push_back(bin);
    }
    return s;
}

// --- report files -------------------------------------------------------------------

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::ofstream open_report(const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    out.precision(10);
    return out;
}

} // namespace

void write_eval_json(const std::string& path, const EvalReport& report)
{
    json j;
    j["track_id"] = report.track_id;
    json shapes = json::array();
    for (const ShapeScore& s : report.shape) {
        shapes.push_back({{"tau", s.tau},
                          {"completeness", s.completeness},
                          {"accuracy", s.accuracy},
                          {"f1", s.f1},
                          {"gt_count", s.gt_count},
                          {"reconstructed_count", s.reconstructed_count},
                          {"empty", s.empty}});
    }
    j["shape"] = shapes;
    json frames = json::array();
    for (std::size_t i = 0; i < report.pose.distance.size(); ++i) {
        frames.push_back({{"distance", report.pose.distance[i]},
                          {"rotation_error", report.pose.rotation_error[i]},
                          {"translation_error", report.pose.translation_error[i]}});
    }
    json bins = json::array();
    for (const DistanceBin& b : report.pose.bins) {
        bins.push_back({{"lower", b.lower},
                        {"upper", b.upper},
                        {"count", b.count},
                        {"rotation_mean", num(b.rotation_mean)},
                        {"rotation_median", num(b.rotation_median)},
                        {"translation_mean", num(b.translation_mean)},
                        {"translation_median", num(b.translation_median)}});
    }
    j["pose"] = {{"frames", frames}, {"bins", bins}};
    open_report(path) << j.dump(2) << '\n';
}

void write_eval_csv(const std::string& path, const EvalReport& report)
{
    std::ofstream out = open_report(path);
    out << "track,tau,completeness,accuracy,f1,gt_count,reconstructed_count,rotation_median,translation_median\n";
    const double rot = median(report.pose.rotation_error);
    const double trans = median(report.pose.translation_error);
    for (const ShapeScore& s : report.shape) {
        out << report.track_id << ',' << s.tau << ',' << s.completeness << ',' << s.accuracy << ',' << s.f1 << ','
            << s.gt_count << ',' << s.reconstructed_count << ',' << rot << ',' << trans << '\n';
    }
}

void write_eval_gnuplot(const std::string& path, const EvalReport& report)
{
    std::ofstream out = open_report(path);
    out << "# tau completeness accuracy f1\n";
    for (const ShapeScore& s : report.shape) {
        out << s.tau << ' ' << s.completeness << ' ' << s.accuracy << ' ' << s.f1 << '\n';
    }
    out << "\n\n# bin_center count rotation_mean rotation_median translation_mean translation_median\n";
    for (const DistanceBin& b : report.pose.bins) {
        out << 0.5 * (b.lower + b.upper) << ' ' << b.count << ' ' << b.rotation_mean << ' ' << b.rotation_median << ' '
            << b.translation_mean << ' ' << b.translation_median << '\n';
    }
}

} // namespace samp
