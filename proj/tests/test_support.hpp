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

#include "samp/optimizer.hpp"
#include "samp/sdf_grid.hpp"
#include "samp/shape_manifold.hpp"
#include "samp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <unistd.h>
#include <numbers>
#include <stdexcept>
#include <random>
#include <string>

namespace samp::testing {

/// Exact signed distance to a sphere.
class SphereField final : public SignedField {
public:
    SphereField(Vec3 center, double radius, Eigen::AlignedBox3d domain)
        : center_(std::move(center)), radius_(radius), domain_(std::move(domain))
    {
    }
    double value(const Vec3& x) const override { return (x - center_).norm() - radius_; }
    Eigen::AlignedBox3d domain() const override { return domain_; }

private:
    Vec3 center_;
    double radius_;
    Eigen::AlignedBox3d domain_;
};

/// Fresh scratch directory under the system temp path, private to this process.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() /
                     ("samp_test_" + std::to_string(::getpid()) + "_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Coarse car grid that keeps unit tests fast.
inline GridSpec coarse_car_grid() { return GridSpec::vehicle(30, 20, 50, 0.12, 0.36); }

/// Car manifold on the coarse grid, shared by the tests of one binary.
inline const ShapeManifold& coarse_car_manifold()
{
    static const ShapeManifold manifold = ShapeManifold::train(car_training_grids(8, coarse_car_grid(), 7), 4);
    return manifold;
}

inline Vec3 random_vec(std::mt19937_64& rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    return {u(rng), u(rng), u(rng)};
}

/// Ground-truth state shifted rigidly: every frame translated horizontally by `offset`
/// metres (along x) and rotated by `yaw` radians, shape reset to the mean.
inline TrackState perturbed_start(const GroundTruth& truth, int dim, double offset, double yaw)
{
    TrackState s{ShapeCode::Zero(dim), truth.poses};
    for (Pose& p : s.poses) {
        p.t.x() += offset;
        p.theta = wrap_angle(p.theta + yaw);
    }
    return s;
}

inline double max_translation_error(const std::vector<Pose>& a, const std::vector<Pose>& b)
{
    double e = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        e = std::max(e, (a[t].t - b[t].t).norm());
    }
    return e;
}

inline double max_yaw_error(const std::vector<Pose>& a, const std::vector<Pose>& b)
{
    double e = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        e = std::max(e, std::abs(wrap_angle(a[t].theta - b[t].theta)));
    }
    return e;
}

/// RMS over all voxels between two decoded fields.
inline double field_rms(const ShapeManifold& m, const ShapeCode& a, const ShapeCode& b)
{
    const Eigen::VectorXd d = m.decode(a) - m.decode(b);
    return std::sqrt(d.squaredNorm() / static_cast<double>(d.size()));
}

/// Worst relative disagreement between analytic Jacobian blocks and central differences.
struct JacobianAudit {
    double data_pose = 0.0;
    double data_z = 0.0;
    double motion = 0.0;
    double ground = 0.0;
    double prior = 0.0;
    int rows_checked = 0;
    int rows_skipped = 0; ///< data rows whose stencil straddles a voxel face

    double worst() const { return std::max({data_pose, data_z, motion, ground, prior}); }
};

inline double relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric)
{
    return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-2);
}

/// Trilinear interpolation is only piecewise smooth; rows whose perturbed object-frame point
/// can leave the current cell are excluded from the pose audit.
inline bool near_cell_face(const GridSpec& spec, const Vec3& xo, double margin)
{
    const Vec3 f = (xo - spec.origin) / spec.voxel_size;
    const Vec3 frac = f - f.array().floor().matrix();
    const double m = margin / spec.voxel_size;
    return (frac.array() < m).any() || (frac.array() > 1.0 - m).any();
}

inline JacobianAudit audit_jacobians(const Problem& problem, const TrackState& state, double h = 1e-6)
{
    const ShapeManifold& m = problem.manifold();
    const Track& track = problem.track();
    const JacobianBlocks J = jacobians(problem, state);
    JacobianAudit audit;
    auto data = [&](const ShapeCode& z, const Pose& pose, int t) {
        return data_residuals(m, z, pose, track.frames[t], track.calib, problem.inflation());
    };
    for (const auto& block : J.data) {
        const int t = block.frame;
        const Pose& pose = state.poses[t];
        const auto n = block.r.size();
        Eigen::MatrixXd fd_pose(n, 6);
        for (int k = 0; k < 6; ++k) {
            Vec6 e = Vec6::Zero();
            e[k] = h;
            fd_pose.col(k) = (data(state.z, Pose::from_vector(pose.vector() + e), t) -
                              data(state.z, Pose::from_vector(pose.vector() - e), t)) / (2.0 * h);
        }
        Eigen::MatrixXd fd_z(n, state.z.size());
        for (int i = 0; i < state.z.size(); ++i) {
            ShapeCode zp = state.z, zm = state.z;
            zp[i] += h;
            zm[i] -= h;
            fd_z.col(i) = (data(zp, pose, t) - data(zm, pose, t)) / (2.0 * h);
        }
        audit.data_z = std::max(audit.data_z, relative_error(block.d_z, fd_z));
        const auto& obs = problem.observations(t);
        for (Eigen::Index row = 0; row < n; ++row) {
            if (near_cell_face(m.spec(), pose.to_object(obs[static_cast<std::size_t>(row)].x), 1e-4)) {
                ++audit.rows_skipped;
                continue;
            }
            ++audit.rows_checked;
            audit.data_pose = std::max(audit.data_pose, relative_error(block.d_pose.row(row), fd_pose.row(row)));
        }
    }
    for (const auto& block : J.motion) {
        const int t = block.frame;
        Eigen::MatrixXd fd_cur(6, 6), fd_prev(6, 6);
        for (int k = 0; k < 6; ++k) {
            for (int which = 0; which < 2; ++which) {
                TrackState sp = state, sm = state;
                Pose& pp = sp.poses[t - which];
                Pose& pm = sm.poses[t - which];
                Vec6 e = Vec6::Zero();
                e[k] = h;
                pp = Pose::from_vector(pp.vector() + e);
                pm = Pose::from_vector(pm.vector() - e);
                const Vec6 col = (problem.kinematic_residual(sp, t) - problem.kinematic_residual(sm, t)) / (2.0 * h);
                (which == 0 ? fd_cur : fd_prev).col(k) = col;
            }
        }
        audit.motion = std::max({audit.motion, relative_error(block.d_pose, fd_cur), relative_error(block.d_prev, fd_prev)});
        audit.motion = std::max(audit.motion, relative_error(block.r, problem.kinematic_residual(state, t)));
    }
    for (const auto& block : J.ground) {
        Eigen::Matrix<double, 1, 6> fd;
        for (int k = 0; k < 6; ++k) {
            TrackState sp = state, sm = state;
            Vec6 e = Vec6::Zero();
            e[k] = h;
            sp.poses[block.frame] = Pose::from_vector(sp.poses[block.frame].vector() + e);
            sm.poses[block.frame] = Pose::from_vector(sm.poses[block.frame].vector() - e);
            fd[k] = (problem.ground_residual(sp, block.frame) - problem.ground_residual(sm, block.frame)) / (2.0 * h);
        }
        audit.ground = std::max(audit.ground, relative_error(block.d_pose.transpose(), fd));
    }
    // Oracle prior residual sqrt(w) z_i / sigma_i from the manifold eigenvalues.
    const double sw = std::sqrt(problem.config().shape_prior_weight);
    auto prior = [&](const ShapeCode& z) { return Eigen::VectorXd(sw * z.cwiseQuotient(m.eigenvalues().cwiseSqrt())); };
    Eigen::MatrixXd fd_prior(state.z.size(), state.z.size());
    for (int i = 0; i < state.z.size(); ++i) {
        ShapeCode zp = state.z, zm = state.z;
        zp[i] += h;
        zm[i] -= h;
        fd_prior.col(i) = (prior(zp) - prior(zm)) / (2.0 * h);
    }
    audit.prior = std::max(relative_error(Eigen::MatrixXd(J.prior_d_z.asDiagonal()), fd_prior),
                           relative_error(J.prior_r, prior(state.z)));
    const double kappa = problem.config().shape_prior_weight * shape_prior(m, state.z);
    audit.prior = std::max(audit.prior, std::abs(J.prior_r.squaredNorm() - kappa) / std::max(kappa, 1e-2));
    return audit;
}

/// A random state near the ground truth: translations within +-0.5 m, yaw within +-0.2 rad,
/// velocities and shape drawn independently.
inline TrackState random_state(const GroundTruth& truth, const ShapeManifold& m, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TrackState s{ShapeCode::Zero(m.dim()), truth.poses};
    for (int i = 0; i < m.dim(); ++i) {
        s.z[i] = u(rng) * std::sqrt(m.eigenvalues()[i]);
    }
    for (Pose& p : s.poses) {
        p.t += 0.5 * Vec3(u(rng), u(rng), u(rng));
        p.theta = wrap_angle(p.theta + 0.2 * u(rng));
        p.v += 2.0 * u(rng);
        p.omega += 0.2 * u(rng);
    }
    return s;
}

/// Empirical standard deviation of the normalized depth error e / (d^2 sigma / (b f)) for a
/// parked car at range `range`, over at least `samples` pixels. Noisy and noise-free renders share
/// their pixel order, so errors pair up exactly.
inline double normalized_depth_error_std(const ShapeManifold& m, double range, std::size_t samples,
                                         double sigma_disp = 1.0)
{
    ScenarioSpec spec;
    spec.name = "depth-noise";
    spec.regime = MotionRegime::kStanding;
    spec.start_x = 0.0;
    spec.start_z = range;
    spec.heading = std::numbers::pi / 2.0;
    spec.frames = 2;
    ScenarioSpec clean = spec;
    const std::size_t per_frame = generate(clean, m).track.frames[0].pool.size();
    spec.frames = clean.frames = static_cast<int>(samples / per_frame) + 2;
    spec.sigma_disp_px = sigma_disp;
    const Scene exact = generate(clean, m);
    const Scene noisy = generate(spec, m);
    const double bf = spec.calib.b_m * spec.calib.f_px;
    double sum = 0.0, sum2 = 0.0;
    std::size_t n = 0;
    for (int k = 0; k < spec.frames; ++k) {
        const auto& a = exact.track.frames[k].depth;
        const auto& b = noisy.track.frames[k].depth;
        if (a.size() != b.size()) {
            throw std::runtime_error("noisy render dropped pixels");
        }
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double e = (b[i] - a[i]) / (a[i] * a[i] * sigma_disp / bf);
            sum += e;
            sum2 += e * e;
            ++n;
        }
    }
    const double mean = sum / static_cast<double>(n);
    return std::sqrt(sum2 / static_cast<double>(n) - mean * mean);
}

/// Point sets of 10000 points each whose threshold tests at tau = 0.2 m give exactly the
/// requested accuracy and completeness (two decimals). Matches sit on a line 1 m apart; a
/// match may pair two points of one set within 0.1 m of a single point of the other.
struct ScoredPointSets {
    Points gt;
    Points reconstructed;
};

inline ScoredPointSets scored_point_sets(double accuracy_pct, double completeness_pct)
{
    constexpr int kN = 10000;
    const int accurate = static_cast<int>(std::lround(accuracy_pct * 100.0));
    const int covered = static_cast<int>(std::lround(completeness_pct * 100.0));
    ScoredPointSets s;
    double x = 0.0;
    // Each cluster holds one point of the smaller side and one or two of the larger side.
    const bool gt_larger = covered >= accurate;
    const int small = std::min(accurate, covered);
    const int doubled = std::abs(covered - accurate);
    if (doubled > small) {
        throw std::invalid_argument("unreachable accuracy/completeness pair");
    }
    for (int i = 0; i < small; ++i, x += 1.0) {
        Points& big = gt_larger ? s.gt : s.reconstructed;
        Points& one = gt_larger ? s.reconstructed : s.gt;
        one.emplace_back(x, 0.0, 0.0);
        big.emplace_back(x, 0.0, 0.0);
        if (i < doubled) {
            big.emplace_back(x + 0.1, 0.0, 0.0);
        }
    }
    // Unmatched points, far from everything.
    for (std::size_t i = s.gt.size(); i < kN; ++i) {
        s.gt.emplace_back(static_cast<double>(i), 100.0, 0.0);
    }
    for (std::size_t i = s.reconstructed.size(); i < kN; ++i) {
        s.reconstructed.emplace_back(static_cast<double>(i), -100.0, 0.0);
    }
    return s;
}

} // namespace samp::testing
