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

#include "samp/ingest.hpp"
#include "samp/motion.hpp"
#include "samp/shape_manifold.hpp"
#include "samp/track.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace samp {

struct LmSettings {
    int max_iterations = 100;
    double initial_damping = 1e-4;
    double gradient_tolerance = 1e-8;
    double function_tolerance = 1e-10; ///< relative cost change
    double step_tolerance = 1e-10;     ///< relative step norm

    void validate() const;
};

struct EnergyConfig {
    double huber_delta = 1.345;
    double shape_prior_weight = 1.0;
    MotionNoise noise;
    RegimeThresholds thresholds;
    double initial_inflation = 2.0; ///< depth-uncertainty scale in the first pass
    LmSettings lm;
    int em_passes = 1;              ///< reassociate + re-solve rounds after the first solve
    double association_radius = kDefaultAssociationRadius;
    bool use_motion_terms = true;   ///< drop kinematic and ground terms (diagnostics only)

    void validate() const;
};

/// Huber loss on a whitened residual: r^2 inside [-delta, delta], 2 delta |r| - delta^2 outside.
double huber(double r, double delta);
/// IRLS weight rho'(r) / (2 r).
double huber_weight(double r, double delta);

/// Standard deviation of a stereo depth sample along the viewing ray: d^2 sigma_disp / (b f).
double depth_sigma(double depth, const Calibration& calib);

/// Whitened (not yet robustified) data residuals phi_z(T_pose x) / sigma for the
/// observed points of a frame.
Eigen::VectorXd data_residuals(const ShapeManifold& manifold, const ShapeCode& z, const Pose& pose, const Frame& frame,
                               const Calibration& calib, double inflation = 1.0);

/// Shape prior kappa(z) = sum_i z_i^2 / lambda_i.
double shape_prior(const ShapeManifold& manifold, const ShapeCode& z);

struct TrackState {
    ShapeCode z;
    std::vector<Pose> poses;
};

struct EnergyBreakdown {
    double data = 0.0;   ///< (1/T) sum_t (1/N_t) sum_i rho(r_ti)
    double motion = 0.0; ///< (1/T) sum_t (|r_motion,t|^2 + r_ground,t^2)
    double shape = 0.0;  ///< weight * kappa(z)
    double total = 0.0;
    std::vector<double> frame_data;   ///< per-frame (1/N_t) sum_i rho
    std::vector<double> frame_motion; ///< per-frame motion + ground contribution
};

/// Everything the energy needs besides the state: observations with their depth
/// uncertainty, and the motion whitening frozen at a linearization state.
class Problem {
public:
    Problem(const ShapeManifold& manifold, const Track& track, const EnergyConfig& config, MotionRegime regime,
            const TrackState& linearization, double inflation = 1.0);

    struct Observation {
        Vec3 x;
        double inv_sigma;
    };

    const ShapeManifold& manifold() const { return *manifold_; }
    const Track& track() const { return *track_; }
    const EnergyConfig& config() const { return config_; }
    MotionRegime regime() const { return regime_; }
    double inflation() const { return inflation_; }
    int frames() const { return track_->size(); }
    const std::vector<Observation>& observations(int t) const { return observations_[t]; }
    /// L^{-1} of the motion covariance into frame t (t >= 1).
    const Mat6& motion_whitening(int t) const { return whitening_[t]; }
    const Eigen::VectorXd& inv_sigma_shape() const { return inv_sigma_shape_; }

    /// Throws ComputeError naming the term and frame when the energy is not finite.
    EnergyBreakdown energy(const TrackState& state) const;
    /// Same without the finiteness check (trial steps).
    EnergyBreakdown energy_unchecked(const TrackState& state) const { return evaluate(state, false); }

    /// Kinematic part of the motion residual of frame t (t >= 1) and its ground residual.
    Vec6 kinematic_residual(const TrackState& state, int t) const;
    double ground_residual(const TrackState& state, int t) const;

private:
    EnergyBreakdown evaluate(const TrackState& state, bool check) const;

    const ShapeManifold* manifold_;
    const Track* track_;
    EnergyConfig config_;
    MotionRegime regime_;
    double inflation_;
    std::vector<std::vector<Observation>> observations_;
    std::vector<Mat6> whitening_;
    Eigen::VectorXd inv_sigma_shape_;
};

/// Jacobian blocks of every residual; each data row touches z and one pose, each motion
/// block touches two consecutive poses, the prior touches z only.
struct JacobianBlocks {
    struct DataBlock {
        int frame = 0;
        Eigen::VectorXd r;                  ///< whitened residuals
        Eigen::Matrix<double, Eigen::Dynamic, 6> d_pose;
        Eigen::MatrixXd d_z;
    };
    struct MotionBlock {
        int frame = 0;                      ///< t >= 1
        Vec6 r;
        Mat6 d_pose;                        ///< w.r.t. pose t
        Mat6 d_prev;                        ///< w.r.t. pose t-1
    };
    struct GroundBlock {
        int frame = 0;
        double r = 0.0;
        Vec6 d_pose;
    };
    std::vector<DataBlock> data;
    std::vector<MotionBlock> motion;
    std::vector<GroundBlock> ground;
    Eigen::VectorXd prior_r;                ///< sqrt(weight) z_i / sigma_i
    Eigen::VectorXd prior_d_z;              ///< diagonal
};

JacobianBlocks jacobians(const Problem& problem, const TrackState& state);

struct LmReport {
    TrackState state;
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
    std::vector<double> energy_history; ///< initial energy, then one entry per accepted step
};

/// Levenberg-Marquardt over a fixed problem, starting from `start`.
LmReport minimize(const Problem& problem, const TrackState& start);

struct PassReport {
    MotionRegime regime = MotionRegime::kStanding;
    double inflation = 1.0;
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
    std::vector<double> energy_history;
    std::vector<std::size_t> observation_counts;
};

struct FitResult {
    std::string track_id;
    ShapeCode z;
    std::vector<Pose> poses;
    MotionRegime regime = MotionRegime::kStanding;
    EnergyBreakdown energy;
    int iterations = 0;
    bool converged = false;
    std::vector<double> energy_history;  ///< final pass
    std::vector<double> frame_rms;       ///< per-frame RMS surface distance of observations (m)
    std::vector<PassReport> passes;
    std::vector<std::vector<std::size_t>> association; ///< final observation indices per frame
};

/// Full pipeline: associate around detections, initialize (unless `start` is given),
/// minimize with inflated depth noise, then `em_passes` rounds of reassociation around the
/// optimized poses followed by a re-solve. Non-convergence is reported, never thrown.
FitResult solve(const Track& track, const ShapeManifold& manifold, const EnergyConfig& config = {},
                const std::optional<TrackState>& start = std::nullopt);

/// Per-frame RMS of phi over a frame's observed points; NaN for empty frames.
std::vector<double> frame_surface_rms(const ShapeManifold& manifold, const Track& track, const TrackState& state);

/// Fit JSON with the inputs it came from, so evaluation can locate them.
struct FitRecord {
    FitResult fit;
    std::string track_path;
    std::string manifold_path;
};

void write_fit(const std::string& path, const FitRecord& record);
FitRecord read_fit(const std::string& path);

} // namespace samp
