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

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace samp {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Per-frame object state: ground-contact translation (world, y down), yaw about the
/// gravity axis, forward speed and yaw rate. The object's forward axis maps to
/// (-sin theta, 0, -cos theta) in the world.
struct Pose {
    Vec3 t = Vec3::Zero();
    double theta = 0.0;
    double v = 0.0;
    double omega = 0.0;

    Vec6 vector() const;
    static Pose from_vector(const Vec6& x);
    Eigen::Matrix3d rotation() const;
    Eigen::Isometry3d object_to_world() const;
    /// Maps a world point into the canonical object frame.
    Vec3 to_object(const Vec3& world) const;
};

/// Componentwise a - b with the yaw difference wrapped to (-pi, pi].
Vec6 pose_difference(const Pose& a, const Pose& b);

enum class MotionRegime { kTurning, kStraight, kStanding };

std::string to_string(MotionRegime regime);
MotionRegime regime_from_string(const std::string& name);

struct RegimeThresholds {
    double eps_v = 0.5;      ///< m/s
    double eps_omega = 0.03; ///< rad/s
};

/// Standing if |v| < eps_v, else Straight if |omega| < eps_omega, else Turning.
MotionRegime classify(double v, double omega, const RegimeThresholds& thresholds = {});

/// Kinematic prediction g(pose) over dt. Turning integrates the circular arc exactly
/// (second-order series in omega when |omega dt| < 1e-4); Straight is its omega -> 0 limit;
/// Standing is the identity. Height, speed and yaw rate are always carried over.
Pose predict(const Pose& pose, double dt, MotionRegime regime);

/// d g / d pose (6x6).
Mat6 prediction_jacobian(const Pose& pose, double dt, MotionRegime regime);

/// d g / d (v, omega) restricted to the displacement rows (t, theta); the speed and yaw
/// rate rows are zero.
Eigen::Matrix<double, 6, 2> velocity_jacobian(const Pose& pose, double dt, MotionRegime regime);

struct MotionNoise {
    double sigma_v = 1.0;     ///< m/s per step
    double sigma_omega = 0.1; ///< rad/s per step
    /// Additive floor variances on (tx, ty, tz, theta, v, omega).
    Vec6 floor_variance = (Vec6() << 0.05 * 0.05, 0.05 * 0.05, 0.05 * 0.05, 0.02 * 0.02, 0.5 * 0.5, 0.05 * 0.05).finished();

    void validate() const;
};

/// Sigma = G diag(sigma_v^2, sigma_omega^2) G^T + floor.
Mat6 propagate_covariance(const Pose& pose, double dt, MotionRegime regime, const MotionNoise& noise);

/// Whitening factor L^{-1} with Sigma = L L^T. Throws ComputeError when Sigma is not
/// positive definite.
Mat6 whitening(const Mat6& covariance);

/// Road surface y = elevation(x, z) from plane coefficients a x + b y + c z + d = 0.
struct GroundPlane {
    Eigen::Vector4d coeffs{0.0, 1.0, 0.0, 0.0}; ///< unit normal, b > 0
    double variance = 0.05 * 0.05;              ///< m^2
    bool fallback = false;                      ///< estimated without enough support

    /// Normalizes and validates (normal within 45 degrees of vertical).
    static GroundPlane from_coefficients(const Eigen::Vector4d& coeffs, double variance);

    double elevation(double x, double z) const { return -(coeffs[0] * x + coeffs[2] * z + coeffs[3]) / coeffs[1]; }
    /// True when the point lies above the road (smaller y than the surface).
    bool above(const Vec3& p) const { return p.y() < elevation(p.x(), p.z()); }
};

/// Whitened ground-plane residual (t_y - elevation(t_x, t_z)) / sqrt(variance).
double ground_residual(const Pose& pose, const GroundPlane& plane);
/// Its gradient with respect to the pose vector.
Vec6 ground_residual_gradient(const GroundPlane& plane);

using MotionResidual = Eigen::Matrix<double, 7, 1>;

/// First six entries: L^{-1} (pose_t - g(pose_prev)) with Sigma from propagate_covariance at
/// pose_prev; seventh: the ground-plane residual of pose_t.
MotionResidual motion_residual(const Pose& pose_t, const Pose& pose_prev, double dt, MotionRegime regime,
                               const MotionNoise& noise, const GroundPlane& plane);

struct GroundPlaneSettings {
    int min_points = 50;
    int iterations = 200;
    double inlier_threshold = 0.05; ///< m
    double variance_floor = 0.05 * 0.05;
    double fallback_variance = 1.0;
    std::uint64_t seed = 0;
};

/// RANSAC plane with a least-squares refit on the consensus set. Falls back to y = 0 with
/// an inflated variance (flagged) when fewer than min_points are given or no plausible
/// plane is found.
GroundPlane fit_ground_plane(const Points& points, const GroundPlaneSettings& settings = {});

/// Points within a vertical band of the detection's ground-contact point and a horizontal radius.
Points ground_candidates(const Points& pool, const Vec3& contact_point, double band = 0.2, double radius = 10.0);

} // namespace samp
