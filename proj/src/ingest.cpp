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
#include "samp/ingest.hpp"

#include <algorithm>
#include <cmath>

namespace samp {

std::vector<std::size_t> filter_observations(const Frame& frame, const Vec3& center, double radius)
{
    if (!(radius > 0.0)) {
        throw InputError("association radius must be positive");
    }
    const double r2 = radius * radius;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < frame.pool.size(); ++i) {
        const Vec3& p = frame.pool[i];
        if (frame.plane.above(p) && (p - center).squaredNorm() <= r2) {
            kept.push_back(i);
        }
    }
    return kept;
}

std::vector<std::size_t> filter_observations(const Frame& frame, double radius)
{
    return filter_observations(frame, frame.detection.center, radius);
}

void associate_detections(Track& track, double radius)
{
    for (Frame& f : track.frames) {
        f.observed = filter_observations(f, radius);
        if (f.observation_free()) {
            log(LogLevel::kInfo, "track ", track.id, " frame ", f.index, ": no observations");
        }
    }
}

double lower_median(std::vector<double> values)
{
    if (values.empty()) {
        throw InputError("median of an empty sample");
    }
    const std::size_t k = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
    return values[k];
}

Initialization initialize(const Track& track, const ShapeManifold& manifold, const RegimeThresholds& thresholds)
{
    const int T = track.size();
    if (T < 2) {
        throw InputError("track " + track.id + ": initialization needs at least 2 frames");
    }
    const Vec3 first = track.frames.front().detection.center;
    const Vec3 last = track.frames.back().detection.center;
    const Vec3 seg = last - first;
    const double heading = std::atan2(-seg.x(), -seg.z());
    const Vec3 forward(-std::sin(heading), 0.0, -std::cos(heading));

    std::vector<double> speeds;
    std::vector<double> rates;
    for (int t = 1; t < T; ++t) {
        const Detection& a = track.frames[t - 1].detection;
        const Detection& b = track.frames[t].detection;
        const double dt = track.dt(t);
        speeds.push_back((b.center - a.center).dot(forward) / dt);
        rates.push_back(wrap_angle(b.yaw - a.yaw) / dt);
    }

    Initialization init;
    init.z = ShapeCode::Zero(manifold.dim());
    const double v = lower_median(speeds);
    const double omega = lower_median(rates);
    init.regime = classify(v, omega, thresholds);
    for (const Frame& f : track.frames) {
        Pose p;
        p.t = f.detection.center;
        p.t.y() = f.plane.elevation(p.t.x(), p.t.z());
        p.theta = init.regime == MotionRegime::kStanding ? wrap_angle(f.detection.yaw) : heading;
        p.v = v;
        p.omega = omega;
        init.poses.push_back(p);
    }
    return init;
}

Track reassociate(const Track& track, std::span<const Pose> poses, double radius)
{
    if (poses.size() != track.frames.size()) {
        throw InputError("reassociate: pose count does not match the track length");
    }
    Track out = track;
    for (std::size_t t = 0; t < out.frames.size(); ++t) {
        out.frames[t].observed = filter_observations(out.frames[t], poses[t].t, radius);
    }
    return out;
}

} // namespace samp
