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
#include "samp/car_shapes.hpp"

#include <cmath>
#include <random>

namespace samp {
namespace {

bool in_polygon(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& q)
{
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a.y() > q.y()) != (b.y() > q.y())) {
            const double x = a.x() + (q.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (q.x() < x) {
                inside = !inside;
            }
        }
    }
    return inside;
}

double signed_area(const std::vector<Eigen::Vector2d>& poly)
{
    double a = 0.0;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        a += poly[j].x() * poly[i].y() - poly[i].x() * poly[j].y();
    }
    return 0.5 * a;
}

} // namespace

std::vector<Eigen::Vector2d> CarParams::profile() const
{
    const double half = 0.5 * length;
    const double y_bottom = -clearance;
    const double y_belt = -(clearance + body_height);
    const double y_bumper = -(clearance + bumper_height);
    const double y_roof = -height;
    // Front of the car points towards -z.
    return {
        {-half, y_bottom},
        {half, y_bottom},
        {half, y_bumper},
        {half - 0.15, y_belt},
        {half - trunk_length, y_belt},
        {half - trunk_length - rear_window_length, y_roof},
        {-half + hood_length + windshield_length, y_roof},
        {-half + hood_length, y_belt},
        {-half + 0.1, y_belt + 0.08},
        {-half, y_bumper},
    };
}

bool CarParams::contains(const Vec3& p) const
{
    if (std::abs(p.x()) > 0.5 * width) {
        return false;
    }
    return in_polygon(profile(), Eigen::Vector2d(p.z(), p.y()));
}

CarParams random_car(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    CarParams c;
    c.length = uni(3.8, 4.8);
    c.width = uni(1.6, 1.9);
    c.height = uni(1.35, 1.7);
    c.clearance = uni(0.15, 0.25);
    c.body_height = uni(0.55, 0.7);
    c.bumper_height = uni(0.35, 0.5);
    c.hood_length = uni(0.8, 1.3) * c.length / 4.4;
    c.windshield_length = uni(0.5, 0.9);
    c.rear_window_length = uni(0.3, 0.8);
    c.trunk_length = uni(0.3, 1.0) * c.length / 4.4;
    // Keep the cabin top non-degenerate.
    const double roof = c.length - c.hood_length - c.windshield_length - c.rear_window_length - c.trunk_length;
    if (roof < 0.8) {
        c.trunk_length = std::max(0.2, c.trunk_length - (0.8 - roof));
    }
    c.height = std::max(c.height, c.clearance + c.body_height + 0.45);
    return c;
}

PointCloud sample_car_surface(const CarParams& car, double spacing)
{
    PointCloud cloud;
    auto poly = car.profile();
    if (signed_area(poly) < 0.0) {
        std::reverse(poly.begin(), poly.end());
    }
    const double hw = 0.5 * car.width;
    const int nx = std::max(2, static_cast<int>(std::ceil(car.width / spacing)));

    // Side panels at x = +-w/2.
    double zmin = poly[0].x();
    double zmax = zmin;
    double ymin = poly[0].y();
    double ymax = ymin;
    for (const auto& p : poly) {
        zmin = std::min(zmin, p.x());
        zmax = std::max(zmax, p.x());
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
    }
    for (double z = zmin + 0.5 * spacing; z < zmax; z += spacing) {
        for (double y = ymin + 0.5 * spacing; y < ymax; y += spacing) {
            if (!in_polygon(poly, Eigen::Vector2d(z, y))) {
                continue;
            }
            cloud.points.emplace_back(hw, y, z);
            cloud.normals.emplace_back(1.0, 0.0, 0.0);
            cloud.points.emplace_back(-hw, y, z);
            cloud.normals.emplace_back(-1.0, 0.0, 0.0);
        }
    }

    // Extruded profile edges. With counter-clockwise order in (z, y) the outward normal of
    // edge a->b is (dy, -dz).
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Eigen::Vector2d a = poly[i];
        const Eigen::Vector2d b = poly[(i + 1) % poly.size()];
        const Eigen::Vector2d e = b - a;
        const double len = e.norm();
        const Eigen::Vector2d n = Eigen::Vector2d(e.y(), -e.x()) / len;
        const int ne = std::max(1, static_cast<int>(std::ceil(len / spacing)));
        for (int s = 0; s <= ne; ++s) {
            const Eigen::Vector2d q = a + e * (static_cast<double>(s) / ne);
            for (int k = 0; k <= nx; ++k) {
                const double x = -hw + car.width * k / nx;
                cloud.points.emplace_back(x, q.y(), q.x());
                cloud.normals.emplace_back(0.0, n.y(), n.x());
            }
        }
    }
    return cloud;
}

} // namespace samp
