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
#include "samp/motion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace samp {

Vec6 Pose::vector() const
{
    Vec6 x;
    x << t, theta, v, omega;
    return x;
}

Pose Pose::from_vector(const Vec6& x)
{
    return Pose{x.head<3>(), x[3], x[4], x[5]};
}

Eigen::Matrix3d Pose::rotation() const
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    Eigen::Matrix3d r;
    r << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
    return r;
}

Eigen::Isometry3d Pose::object_to_world() const
{
    Eigen::Isometry3d iso = Eigen::Isometry3d::Identity();
    iso.linear() = rotation();
    iso.translation() = t;
    return iso;
}

Vec3 Pose::to_object(const Vec3& world) const
{
    return rotation().transpose() * (world - t);
}

Vec6 pose_difference(const Pose& a, const Pose& b)
{
    Vec6 d = a.vector() - b.vector();
    d[3] = wrap_angle(d[3]);
    return d;
}

std::string to_string(MotionRegime regime)
{
    switch (regime) {
    case MotionRegime::kTurning:
        return "turning";
    case MotionRegime::kStraight:
        return "straight";
    case MotionRegime::kStanding:
        return "standing";
    }
    return "unknown";
}

MotionRegime regime_from_string(const std::string& name)
{
    if (name == "turning") {
        return MotionRegime::kTurning;
    }
    if (name == "straight") {
        return MotionRegime::kStraight;
    }
    if (name == "standing") {
        return MotionRegime::kStanding;
    }
    throw InputError("unknown motion regime '" + name + "' (turning, straight, standing)");
}

MotionRegime classify(double v, double omega, const RegimeThresholds& thresholds)
{
    if (std::abs(v) < thresholds.eps_v) {
        return MotionRegime::kStanding;
    }
    if (std::abs(omega) < thresholds.eps_omega) {
        return MotionRegime::kStraight;
    }
    return MotionRegime::kTurning;
}

namespace {

constexpr double kSeriesThreshold = 1e-4;

/// Planar displacement over dt and its partial derivatives.
struct Displacement {
    double dx = 0.0;
    double dz = 0.0;
    double dtheta = 0.0;
    double dx_dtheta = 0.0;
    double dz_dtheta = 0.0;
    double dx_dv = 0.0;
    double dz_dv = 0.0;
    double dx_domega = 0.0;
    double dz_domega = 0.0;
    double dtheta_domega = 0.0;
};

Displacement displacement(const Pose& p, double dt, MotionRegime regime)
{
    Displacement d;
    const double s = std::sin(p.theta);
    const double c = std::cos(p.theta);
    const double v = p.v;
    switch (regime) {
    case MotionRegime::kStanding:
        break;
    case MotionRegime::kStraight:
        d.dx = -v * dt * s;
        d.dz = -v * dt * c;
        d.dx_dtheta = -v * dt * c;
        d.dz_dtheta = v * dt * s;
        d.dx_dv = -dt * s;
        d.dz_dv = -dt * c;
        break;
    case MotionRegime::kTurning: {
        const double w = p.omega;
        const double e = w * dt;
        d.dtheta = e;
        d.dtheta_domega = dt;
        if (std::abs(e) < kSeriesThreshold) {
            const double e2 = e * e;
            d.dx = v * dt * (-s - c * e / 2.0 + s * e2 / 6.0);
            d.dz = v * dt * (-c + s * e / 2.0 + c * e2 / 6.0);
            d.dx_dtheta = v * dt * (-c + s * e / 2.0 + c * e2 / 6.0);
            d.dz_dtheta = v * dt * (s + c * e / 2.0 - s * e2 / 6.0);
            d.dx_dv = dt * (-s - c * e / 2.0 + s * e2 / 6.0);
            d.dz_dv = dt * (-c + s * e / 2.0 + c * e2 / 6.0);
            d.dx_domega = v * dt * dt * (-c / 2.0 + s * e / 3.0);
            d.dz_domega = v * dt * dt * (s / 2.0 + c * e / 3.0);
        } else {
            const double k = v / w;
            const double s1 = std::sin(p.theta + e);
            const double c1 = std::cos(p.theta + e);
            d.dx = k * (c1 - c);
            d.dz = k * (s - s1);
            d.dx_dtheta = k * (s - s1);
            d.dz_dtheta = k * (c - c1);
            d.dx_dv = (c1 - c) / w;
            d.dz_dv = (s - s1) / w;
            d.dx_domega = -(v / (w * w)) * (c1 - c) - k * dt * s1;
            d.dz_domega = -(v / (w * w)) * (s - s1) - k * dt * c1;
        }
        break;
    }
    }
    return d;
}

} // namespace

Pose predict(const Pose& pose, double dt, MotionRegime regime)
{
    if (regime == MotionRegime::kStanding) {
        return pose;
    }
    const Displacement d = displacement(pose, dt, regime);
    Pose out = pose;
    out.t.x() += d.dx;
    out.t.z() += d.dz;
    out.theta = wrap_angle(pose.theta + d.dtheta);
    return out;
}

Mat6 prediction_jacobian(const Pose& pose, double dt, MotionRegime regime)
{
    const Displacement d = displacement(pose, dt, regime);
    Mat6 j = Mat6::Identity();
    j(0, 3) = d.dx_dtheta;
    j(0, 4) = d.dx_dv;
    j(0, 5) = d.dx_domega;
    j(2, 3) = d.dz_dtheta;
    j(2, 4) = d.dz_dv;
    j(2, 5) = d.dz_domega;
    j(3, 5) = d.dtheta_domega;
    return j;
}

Eigen::Matrix<double, 6, 2> velocity_jacobian(const Pose& pose, double dt, MotionRegime regime)
{
    const Displacement d = displacement(pose, dt, regime);
    Eigen::Matrix<double, 6, 2> g = Eigen::Matrix<double, 6, 2>::Zero();
    g(0, 0) = d.dx_dv;
    g(0, 1) = d.dx_domega;
    g(2, 0) = d.dz_dv;
    g(2, 1) = d.dz_domega;
    g(3, 1) = d.dtheta_domega;
    return g;
}

void MotionNoise::validate() const
{
    if (!(sigma_v > 0.0) || !(sigma_omega > 0.0) || !(floor_variance.array() > 0.0).all()) {
        throw InputError("motion noise parameters must be positive");
    }
}

Mat6 propagate_covariance(const Pose& pose, double dt, MotionRegime regime, const MotionNoise& noise)
{
    const Eigen::Matrix<double, 6, 2> g = velocity_jacobian(pose, dt, regime);
    const Eigen::Vector2d var(noise.sigma_v * noise.sigma_v, noise.sigma_omega * noise.sigma_omega);
    const Mat6 outer = g * var.asDiagonal() * g.transpose();
    Mat6 sigma = 0.5 * (outer + outer.transpose());
    sigma.diagonal() += noise.floor_variance;
    return sigma;
}

Mat6 whitening(const Mat6& covariance)
{
    const Eigen::LLT<Mat6> llt(covariance);
    if (llt.info() != Eigen::Success) {
        throw ComputeError("motion covariance is not positive definite");
    }
    const Mat6 l = llt.matrixL();
    return l.triangularView<Eigen::Lower>().solve(Mat6::Identity());
}

GroundPlane GroundPlane::from_coefficients(const Eigen::Vector4d& coeffs, double variance)
{
    const double n = coeffs.head<3>().norm();
    if (!(n > 0.0) || !coeffs.allFinite()) {
        throw InputError("ground plane normal must be non-zero");
    }
    // Leave already-unit normals untouched so files round-trip exactly.
    Eigen::Vector4d c = std::abs(n - 1.0) > 1e-12 ? Eigen::Vector4d(coeffs / n) : coeffs;
    if (c[1] < 0.0) {
        c = -c;
    }
    if (c[1] < std::cos(std::numbers::pi / 4.0)) {
        throw InputError("ground plane normal is more than 45 degrees from vertical");
    }
    if (!(variance > 0.0)) {
        throw InputError("ground plane variance must be positive");
    }
    GroundPlane plane;
    plane.coeffs = c;
    plane.variance = variance;
    return plane;
}

double ground_residual(const Pose& pose, const GroundPlane& plane)
{
    return (pose.t.y() - plane.elevation(pose.t.x(), pose.t.z())) / std::sqrt(plane.variance);
}

Vec6 ground_residual_gradient(const GroundPlane& plane)
{
    const double inv = 1.0 / std::sqrt(plane.variance);
    Vec6 g = Vec6::Zero();
    g[0] = plane.coeffs[0] / plane.coeffs[1] * inv;
    g[1] = inv;
    g[2] = plane.coeffs[2] / plane.coeffs[1] * inv;
    return g;
}

MotionResidual motion_residual(const Pose& pose_t, const Pose& pose_prev, double dt, MotionRegime regime,
                               const MotionNoise& noise, const GroundPlane& plane)
{
    const Mat6 w = whitening(propagate_covariance(pose_prev, dt, regime, noise));
    MotionResidual r;
    r.head<6>() = w * pose_difference(pose_t, predict(pose_prev, dt, regime));
    r[6] = ground_residual(pose_t, plane);
    return r;
}

namespace {

/// Total least-squares plane through the points: (unit normal, offset).
Eigen::Vector4d fit_plane_lsq(const Points& pts)
{
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : pts) {
        centroid += p;
    }
    centroid /= static_cast<double>(pts.size());
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (const Vec3& p : pts) {
        const Vec3 d = p - centroid;
        scatter += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
    const Vec3 n = es.eigenvectors().col(0);
    Eigen::Vector4d c;
    c << n, -n.dot(centroid);
    return c;
}

} // namespace

GroundPlane fit_ground_plane(const Points& points, const GroundPlaneSettings& settings)
{
    auto fallback = [&](const char* why) {
        warn("ground plane fallback to y = 0: ", why);
        GroundPlane plane;
        plane.variance = settings.fallback_variance;
        plane.fallback = true;
        return plane;
    };
    if (static_cast<int>(points.size()) < settings.min_points) {
        return fallback("too few candidate points");
    }

    const double min_vertical = std::cos(std::numbers::pi / 4.0);
    std::mt19937_64 rng(settings.seed);
    std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
    std::size_t best_count = 0;
    Eigen::Vector4d best = Eigen::Vector4d::Zero();
    for (int it = 0; it < settings.iterations; ++it) {
        const std::size_t a = pick(rng);
        const std::size_t b = pick(rng);
        const std::size_t c = pick(rng);
        if (a == b || b == c || a == c) {
            continue;
        }
        Vec3 n = (points[b] - points[a]).cross(points[c] - points[a]);
        const double len = n.norm();
        if (len < 1e-9) {
            continue;
        }
        n /= len;
        if (std::abs(n.y()) < min_vertical) {
            continue;
        }
        const double d = -n.dot(points[a]);
        std::size_t count = 0;
        for (const Vec3& p : points) {
            count += std::abs(n.dot(p) + d) < settings.inlier_threshold;
        }
        if (count > best_count) {
            best_count = count;
            best << n, d;
        }
    }
    if (best_count < 3) {
        return fallback("no plausible plane hypothesis");
    }

    Eigen::Vector4d plane = best;
    Points inliers;
    for (int refit = 0; refit < 2; ++refit) {
        inliers.clear();
        for (const Vec3& p : points) {
            if (std::abs(plane.head<3>().dot(p) + plane[3]) < settings.inlier_threshold) {
                inliers.push_back(p);
            }
        }
        if (inliers.size() < 3) {
            return fallback("degenerate consensus set");
        }
        plane = fit_plane_lsq(inliers);
    }
    double sq = 0.0;
    for (const Vec3& p : inliers) {
        const double r = plane.head<3>().dot(p) + plane[3];
        sq += r * r;
    }
    const double variance = std::max(settings.variance_floor, sq / static_cast<double>(inliers.size()));
    if (std::abs(plane[1]) < min_vertical) {
        return fallback("refined plane is not near-horizontal");
    }
    return GroundPlane::from_coefficients(plane, variance);
}

Points ground_candidates(const Points& pool, const Vec3& contact_point, double band, double radius)
{
    Points out;
    for (const Vec3& p : pool) {
        const double dx = p.x() - contact_point.x();
        const double dz = p.z() - contact_point.z();
        if (std::abs(p.y() - contact_point.y()) <= band && dx * dx + dz * dz <= radius * radius) {
            out.push_back(p);
        }
    }
    return out;
}

} // namespace samp
